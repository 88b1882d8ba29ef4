#ifndef TASEPLAB_TOOLS_VERIFY_SUITE_HPP
#define TASEPLAB_TOOLS_VERIFY_SUITE_HPP

// Fast invariant suite behind the `verify` subcommand: one line per
// property, exit status for scripting. Heavier statistical checks live in
// the test binaries; these are the structural invariants a fresh checkout
// must satisfy in a few seconds.

namespace taseplab::tools {

int run_verify_suite();

}

#endif
