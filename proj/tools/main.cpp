#include <string>
#include <vector>

#include "l1sgd/cli.hpp"

int main(int argc, char** argv) {
  return l1sgd::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
