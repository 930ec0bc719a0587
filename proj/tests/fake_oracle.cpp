// Line-protocol oracle used by the transport tests.
//
//   fake_oracle good              colorgate verdicts against the golden gallery
//   fake_oracle garbage           replies with non-JSON
//   fake_oracle wrong-id          replies with a mismatched id
//   fake_oracle crash-once <file> exits without replying unless <file> exists
//   fake_oracle silent            never replies
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <json.hpp>

#include "chromafool/conformance.hpp"
#include "chromafool/errors.hpp"
#include "chromafool/wire.hpp"

using namespace chromafool;

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "good";
  if (mode == "crash-once") {
    const std::filesystem::path marker = argc > 2 ? argv[2] : "crash_marker";
    if (!std::filesystem::exists(marker)) {
      std::ofstream(marker) << "crashed\n";
      std::string line;
      std::getline(std::cin, line);
      return 3;
    }
  }
  const Gallery gallery = golden_gallery();
  std::string line;
  while (std::getline(std::cin, line)) {
    if (mode == "silent") {
      std::this_thread::sleep_for(std::chrono::seconds(30));
      continue;
    }
    if (mode == "garbage") {
      std::cout << "this is not json" << std::endl;
      continue;
    }
    std::string id;
    try {
      const auto req = wire::decode_request(line);
      id = req.id;
      const PipelineVerdict v = colorgate_verdict(req.image, ColorGateParams{}, &gallery);
      std::cout << wire::encode_response(mode == "wrong-id" ? id + "x" : id, v) << std::endl;
    } catch (const Error& e) {
      nlohmann::json err{{"id", id}, {"error", e.what()}};
      std::cout << err.dump() << std::endl;
    }
  }
  return 0;
}
