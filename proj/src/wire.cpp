#include "chromafool/wire.hpp"

#include <openssl/evp.h>

#include <json.hpp>

#include "chromafool/errors.hpp"
#include "chromafool/image_io.hpp"

namespace chromafool::wire {

using nlohmann::ordered_json;

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw FormatError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw FormatError("invalid base64 payload");
  // EVP_DecodeBlock keeps the bytes produced by '=' padding; drop them.
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string encode_request(const std::string& id, const Image& img) {
  ordered_json j;
  j["id"] = id;
  j["image_png_b64"] = base64_encode(encode_png(img));
  return j.dump();
}

Request decode_request(std::string_view line) {
  const auto j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw FormatError("request is not a JSON object");
  if (!j.contains("id") || !j["id"].is_string()) throw FormatError("request lacks a string id");
  if (!j.contains("image_png_b64") || !j["image_png_b64"].is_string()) {
    throw FormatError("request lacks image_png_b64");
  }
  const auto bytes = base64_decode(j["image_png_b64"].get<std::string>());
  return Request{j["id"].get<std::string>(), decode_png(bytes)};
}

std::string encode_response(const std::string& id, const PipelineVerdict& verdict) {
  ordered_json j;
  j["id"] = id;
  j["label"] = static_cast<int>(verdict.label);
  j["quality"] = verdict.quality;
  j["match_id"] = verdict.match_id ? ordered_json(*verdict.match_id) : ordered_json(nullptr);
  return j.dump();
}

PipelineVerdict decode_response(std::string_view line, const std::optional<std::string>& expected_id) {
  const std::string payload(line);
  const auto j = ordered_json::parse(payload, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw MalformedResponse("response is not a JSON object: " + payload);
  if (j.contains("error")) throw MalformedResponse("oracle reported an error: " + payload);
  if (!j.contains("id") || !j["id"].is_string()) throw MalformedResponse("response lacks a string id: " + payload);
  if (expected_id && j["id"].get<std::string>() != *expected_id) {
    throw MalformedResponse("response id does not match request id " + *expected_id + ": " + payload);
  }
  if (!j.contains("label")) throw MalformedResponse("response lacks label: " + payload);
  if (!j["label"].is_number_integer()) throw MalformedResponse("label is not an integer: " + payload);
  if (!j.contains("quality")) throw MalformedResponse("response lacks quality: " + payload);
  if (!j["quality"].is_number()) throw MalformedResponse("quality is not a number: " + payload);
  if (!j.contains("match_id")) throw MalformedResponse("response lacks match_id: " + payload);
  const auto& m = j["match_id"];
  if (!m.is_null() && !m.is_string()) throw MalformedResponse("match_id is neither string nor null: " + payload);

  const auto label = j["label"].get<long long>();
  if (label != 0 && label != 1) throw OutOfRangeResponse("label out of range: " + payload);
  const double quality = j["quality"].get<double>();
  if (!(quality >= 0.0 && quality <= 1.0)) throw OutOfRangeResponse("quality out of range: " + payload);

  PipelineVerdict v;
  v.label = label == 1 ? Label::Bonafide : Label::Spoofing;
  v.quality = quality;
  if (m.is_string()) v.match_id = m.get<std::string>();
  return v;
}

}  // namespace chromafool::wire
