#pragma once

// Golden-transcript probe for oracle implementations. The golden image is an
// 8x8 two-level magenta pattern whose mean gray is 96 (quality 0.75) and whose
// chroma sits inside the default colorgate tolerance; the golden gallery holds
// four such patterns, id_00 .. id_03, and the image is pattern id_03.

#include <string>

#include "chromafool/image.hpp"
#include "chromafool/oracle.hpp"

namespace chromafool {

inline constexpr const char* kGoldenRequestId = "golden-0";
inline constexpr const char* kGoldenResponse = R"({"id":"golden-0","label":1,"quality":0.75,"match_id":"id_03"})";

Image golden_pattern(std::size_t index);  // 0..3
Image golden_image();
Gallery golden_gallery();

struct CheckResult {
  bool passed = false;
  PipelineVerdict verdict;
  std::string response;  // the verdict re-encoded under the golden request id
  std::string message;
};

// Sends the golden image once and compares the verdict with the golden
// response: label and match exactly, quality within 1e-6.
CheckResult oracle_check(Oracle& oracle);

}  // namespace chromafool
