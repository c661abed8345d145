#pragma once

#include <stdexcept>
#include <string>

namespace idem {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OrderLimitExceeded : Error { using Error::Error; };
struct GroupMismatch : Error { using Error::Error; };
struct IllFormedHomomorphism : Error { using Error::Error; };
struct EmptyCoveringSet : Error { using Error::Error; };
struct SearchBudgetExceeded : Error { using Error::Error; };
struct ZeroNotInT : Error { using Error::Error; };
struct EtaOutOfRange : Error { using Error::Error; };
struct LambdaOutOfRange : Error { using Error::Error; };
struct WidthTooLarge : Error { using Error::Error; };
struct NullSet : Error { using Error::Error; };
struct NotProbability : Error { using Error::Error; };
struct HypothesisViolated : Error { using Error::Error; };
struct NoKappaFound : Error { using Error::Error; };
struct ZeroFunction : Error { using Error::Error; };
struct NotAlmostInteger : Error {
    NotAlmostInteger(const std::string& what, int element, double deviation)
        : Error(what), element(element), deviation(deviation) {}
    int element;
    double deviation;
};
struct NotSymmetric : Error { using Error::Error; };
struct NotConnected : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct EpsilonTooLarge : Error { using Error::Error; };
struct CertificateMissing : Error { using Error::Error; };
struct IterationBudgetExceeded : Error { using Error::Error; };
struct RoundBudgetExceeded : Error { using Error::Error; };
struct InvariantBroken : Error { using Error::Error; };
struct Infeasible : Error { using Error::Error; };
struct ClaimFailed : Error {
    ClaimFailed(const std::string& claim, const std::string& detail)
        : Error("claim failed: " + claim + " (" + detail + ")"), claim(claim) {}
    std::string claim;
};
struct InputError : Error { using Error::Error; };

}  // namespace idem
