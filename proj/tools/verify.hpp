#pragma once

#include <iosfwd>

namespace amigo {

struct VerifyOptions {
  int generations = 200;
  long train_steps = 20'000;
};

/// Prints one PASS/FAIL line per check; returns true if all pass.
bool run_verify(const VerifyOptions& opt, std::ostream& out);

}  // namespace amigo
