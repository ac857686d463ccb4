// Serves the mock model over stdin/stdout, one JSON request per line.
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "nerbreaker/mock_model.hpp"
#include "nerbreaker/protocol.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mock NER model speaking the adapter protocol on stdio"};
  std::string spec_path;
  std::vector<std::string> caps{"predict", "pos", "similarity"};
  app.add_option("spec", spec_path, "mock model spec (JSON)")->required();
  app.add_option("--capabilities", caps, "advertised capabilities");
  CLI11_PARSE(app, argc, argv);

  std::set<nerbreaker::Capability> capabilities;
  try {
    for (const auto& c : caps) capabilities.insert(nerbreaker::parse_capability(c));
    nerbreaker::MockEndpoint endpoint(nerbreaker::load_mock_spec(spec_path), capabilities);
    std::ios::sync_with_stdio(false);
    std::string line;
    while (std::getline(std::cin, line)) {
      if (line.empty()) continue;
      std::cout << nerbreaker::protocol::handle_line(endpoint, line) << "\n" << std::flush;
    }
  } catch (const std::exception& e) {
    std::cerr << "nerbreaker_mock_server: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
