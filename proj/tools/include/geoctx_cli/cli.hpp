#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geoctx::cli {

// Subcommands: synth, build-graph, extract-features, pretrain, train, eval,
// run-variant, report. Returns the process exit code; module errors print a
// one-line diagnostic to `err` and return 1.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geoctx::cli
