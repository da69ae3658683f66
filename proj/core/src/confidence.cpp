#include "cwpor/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cwpor/error.hpp"

namespace cwpor {

double normalize_rubric(int rubric) {
  if (rubric < 1 || rubric > 5) {
    throw PreconditionError("rubric confidence must be in 1..5, got " + std::to_string(rubric));
  }
  return rubric / 5.0;
}

LlcResult llc(LogprobPair pair) {
  if (!std::isfinite(pair.answer_a) || !std::isfinite(pair.answer_b)) {
    throw PreconditionError("llc: log-probabilities must be finite");
  }
  const double top = std::max(pair.answer_a, pair.answer_b);
  const double ea = std::exp(pair.answer_a - top);
  const double eb = std::exp(pair.answer_b - top);
  const double total = ea + eb;
  LlcResult out{ea / total, eb / total, 0.0, Label::A};
  out.preferred = out.prob_b > out.prob_a ? Label::B : Label::A;
  out.llc = std::max(out.prob_a, out.prob_b);
  return out;
}

double combine(double rubric_norm, double llc_value) {
  if (!(rubric_norm > 0.0 && rubric_norm <= 1.0)) {
    throw PreconditionError("combine: rubric_norm must be in (0, 1]");
  }
  if (!(llc_value >= 0.5 && llc_value <= 1.0)) {
    throw PreconditionError("combine: llc must be in [0.5, 1]");
  }
  return rubric_norm * llc_value;
}

ConfidenceBundle make_bundle(int rubric, LogprobPair pair) {
  const double norm = normalize_rubric(rubric);
  const double l = llc(pair).llc;
  return {norm, l, combine(norm, l)};
}

}  // namespace cwpor
