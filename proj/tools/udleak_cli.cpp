#include <iostream>

#include "udleak/cli.hpp"

int main(int argc, char** argv) {
  const auto parsed = udleak::cli::parse_args(argc, argv);
  if (!parsed.plan) {
    (parsed.exit_code == 0 ? std::cout : std::cerr) << parsed.message << '\n';
    return parsed.exit_code;
  }
  return udleak::cli::run_plan(*parsed.plan);
}
