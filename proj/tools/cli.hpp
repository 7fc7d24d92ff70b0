#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eivpd::cli {

//! Runs one command line (argv[0] included). Returns the process exit code:
//! 0 when every requested output was written, 1 on estimation or I/O errors,
//! 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace eivpd::cli
