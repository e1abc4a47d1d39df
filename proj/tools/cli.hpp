#pragma once

#include <iostream>

namespace pullsim {

/// Entry point of the pullsim tool. Returns 0 on success, 2 on a usage or
/// configuration error and 1 on a runtime failure.
int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace pullsim
