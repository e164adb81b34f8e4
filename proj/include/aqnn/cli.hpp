#pragma once

#include <string>
#include <vector>

namespace aqnn {

// Entry point behind the aqnn binary. args[0] is the program name.
// Exit codes: 0 success, 1 usage error, 2 data/model error.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace aqnn
