#pragma once

#include <stdexcept>
#include <string>

namespace tsc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// time scale construction / queries
struct EmptyInput : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct InvalidSegment : Error { using Error::Error; };
struct PointNotInScale : Error { using Error::Error; };
struct ResultEmpty : Error { using Error::Error; };

// expression language
struct SyntaxError : Error {
    SyntaxError(const std::string& what, std::size_t pos)
        : Error(what + " (at position " + std::to_string(pos) + ")"), position(pos) {}
    std::size_t position;
};
struct UnknownVariable : Error {
    explicit UnknownVariable(const std::string& var)
        : Error("unknown variable '" + var + "'"), name(var) {}
    std::string name;
};
struct UnboundVariable : Error {
    explicit UnboundVariable(const std::string& var)
        : Error("unbound variable '" + var + "'"), name(var) {}
    std::string name;
};
struct DomainError : Error { using Error::Error; };

// calculus
struct NotInDomainKappa : Error { using Error::Error; };
struct StepUnderflow : Error { using Error::Error; };
struct EndpointNotInScale : Error { using Error::Error; };
struct OrderViolation : Error { using Error::Error; };

// variational layer
struct NonConvergence : Error {
    NonConvergence(const std::string& what, double grad_norm)
        : Error(what), gradient_norm(grad_norm) {}
    double gradient_norm;
};
struct SingularHessian : Error { using Error::Error; };
struct ConvexityPreconditionFailed : Error {
    ConvexityPreconditionFailed(const std::string& what,
                                double t_, double x_, double gamma_, double r1_, double r2_)
        : Error(what), t(t_), x(x_), gamma(gamma_), r1(r1_), r2(r2_) {}
    double t, x, gamma, r1, r2;
};

// misc precondition violations
struct InvalidArgument : Error { using Error::Error; };

} // namespace tsc
