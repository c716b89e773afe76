#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mafkit::cli {

enum ExitCode : int {
    ok = 0,
    config_error = 2,
    data_error = 3,
    numerical_error = 4,
};

//! Entry point of the mafkit command. args excludes the program name.
//! Errors are reported as a JSON object on err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mafkit::cli
