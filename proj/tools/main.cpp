#include <iostream>
#include <string>
#include <vector>

#include "rideprobe/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rideprobe::run_cli(args, std::cout, std::cerr);
}
