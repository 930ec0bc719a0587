#pragma once

// Line-delimited JSON protocol spoken with external pipeline oracles.
//
//   request:  {"id": <string>, "image_png_b64": <base64 PNG>}
//   response: {"id": <string>, "label": 0|1, "quality": <[0,1]>, "match_id": <string|null>}

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chromafool/image.hpp"
#include "chromafool/oracle.hpp"

namespace chromafool::wire {

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws FormatError on invalid input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Compact JSON, no trailing newline.
std::string encode_request(const std::string& id, const Image& img);

struct Request {
  std::string id;
  Image image;
};
Request decode_request(std::string_view line);

std::string encode_response(const std::string& id, const PipelineVerdict& verdict);

// MalformedResponse on bad JSON, missing or mistyped fields, or an id that
// differs from expected_id; OutOfRangeResponse on label/quality out of range.
PipelineVerdict decode_response(std::string_view line, const std::optional<std::string>& expected_id = std::nullopt);

}  // namespace chromafool::wire
