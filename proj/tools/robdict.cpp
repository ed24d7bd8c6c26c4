#include <string>
#include <vector>

#include "robdict/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return robdict::cli::run(std::move(args));
}
