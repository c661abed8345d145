#pragma once

#include <cstdint>

namespace idem {

// Tunable constants.  The analysis leaves several absolute constants
// implicit; these defaults are the surfaced choices, overridable from the
// CLI config file.
struct Constants {
    double c_mel = 4.0;         // epsilon gate: eps <= exp(-c_mel * M)
    double c_mel_prime = 6.0;   // theorem-level gate (c_mel + 2)
    double c_cs = 64.0;         // sampler size l = ceil(c_cs * p / eps^2)
    double c3 = 2.0;            // connectivity l = ceil(c3 * M)
    double c2 = 1.0;            // connectivity m = ceil(c2 * l^3)
    int order_limit = 256;      // exhaustive enumeration cap
    int oracle_limit = 16;      // exact minimizer group-order cap
    long long connectivity_budget = 10000000;  // |A|^m cap for exhaustive mode
    int cs_max_attempts = 4;    // sampler retries (l doubles each time)
    double continuity_round_constant = 64.0;   // outer budget ceil(c / delta)
};

}  // namespace idem
