#pragma once

#include "cwpor/prompt_kit.hpp"

namespace cwpor {

// Total log-probabilities of the forced continuations "Answer A" and
// "Answer B" under the same judge prefix.
struct LogprobPair {
  double answer_a;
  double answer_b;

  friend bool operator==(const LogprobPair&, const LogprobPair&) = default;
};

struct LlcResult {
  double prob_a;
  double prob_b;
  double llc;                 // max(prob_a, prob_b), in [0.5, 1]
  Label preferred;            // argmax; A on exact ties
};

// Rubric score c in 1..5 mapped to c/5. Throws PreconditionError otherwise.
double normalize_rubric(int rubric);

// Two-way softmax over the pair, shifted by the max so neither exponent
// overflows. Throws PreconditionError on non-finite input.
LlcResult llc(LogprobPair pair);

// rubric_norm in (0, 1], llc_value in [0.5, 1]; returns their product.
double combine(double rubric_norm, double llc_value);

struct ConfidenceBundle {
  double rubric_norm;
  double llc;
  double combined;  // rubric_norm * llc

  friend bool operator==(const ConfidenceBundle&, const ConfidenceBundle&) = default;
};

ConfidenceBundle make_bundle(int rubric, LogprobPair pair);

}  // namespace cwpor
