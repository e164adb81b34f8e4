#include <string>
#include <vector>

#include "aqnn/cli.hpp"

int main(int argc, char** argv) {
  return aqnn::cli_dispatch(std::vector<std::string>(argv, argv + argc));
}
