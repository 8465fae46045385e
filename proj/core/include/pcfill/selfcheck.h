#pragma once

#include <ostream>

namespace pcfill {

// Runs the built-in invariant and oracle suite with fixed seeds, printing
// one timed pass/fail line per check. Returns the number of failures.
int run_selfcheck(std::ostream& out);

}  // namespace pcfill
