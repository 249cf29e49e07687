#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace karma {

// Entry point of the `karma` tool: ingest, pairgen, serve, simulate, analyze.
// Returns 0 on success, 1 on usage or validation errors, 2 on I/O errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace karma
