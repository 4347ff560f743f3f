import json
import os
import subprocess

import pytest


@pytest.fixture
def cli():
    exe = os.environ.get("VGPQMC_CLI")
    if not exe:
        pytest.skip("VGPQMC_CLI not set")

    def run(*args, stdin=None):
        proc = subprocess.run([exe, *args], input=stdin, capture_output=True, text=True)
        doc = json.loads(proc.stdout) if proc.stdout.strip() else None
        return proc.returncode, doc, proc.stderr

    return run
