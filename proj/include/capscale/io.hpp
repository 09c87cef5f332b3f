#pragma once

#include <iosfwd>

#include "capscale/adversary.hpp"
#include "capscale/bounds.hpp"

namespace capscale {

/// Constants plus the consistency / robustness / competitiveness triple.
/// Non-finite numbers are written as null. `exact` may be null.
void write_constants_json(std::ostream& out, const GuaranteeConstants& g, const CostWeights& w,
                          const ExactConstants* exact = nullptr);

void write_adversary_json(std::ostream& out, const AdversaryReport& report);

}  // namespace capscale
