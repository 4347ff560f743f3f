#pragma once

#include <stdexcept>
#include <string>

namespace vgpqmc {

// Base of every error the library throws on bad input or violated preconditions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class HermiticityError : public Error { using Error::Error; };
class DimensionError : public Error { using Error::Error; };

class MissingEdge : public Error { using Error::Error; };
class NotVgp : public Error { using Error::Error; };

class NearDegenerate : public Error { using Error::Error; };

class NotClosed : public Error { using Error::Error; };
class UndefinedStep : public Error { using Error::Error; };
class BudgetExceeded : public Error { using Error::Error; };

class ZeroWeightTrap : public Error { using Error::Error; };

}  // namespace vgpqmc
