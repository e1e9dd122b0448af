#pragma once

#include <cstdint>
#include <string>

#include "tnet/netdef.hpp"

// End-to-end finite-difference validation at 64-bit precision: the analytic
// loss gradient of every trainable parameter is compared against central
// differences on one random sample. Perturbations that flip a rectifier
// sign or a pooling switch make the difference quotient meaningless; those
// elements retry with a smaller step and are skipped (and counted) if the
// crossing persists.

namespace tnet {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    int checked = 0;
    int skipped_kinks = 0;
};

GradCheckReport gradient_check(const NetworkDef& def, std::uint64_t seed, double step = 1e-4);

}  // namespace tnet
