#pragma once

// Attacker-facing view of the three-stage recognition pipeline: hard label
// from anti-spoofing, a face quality score and an identity match, returned
// together by one query.

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chromafool/image.hpp"

namespace chromafool {

enum class Label : int { Spoofing = 0, Bonafide = 1 };

struct PipelineVerdict {
  Label label = Label::Spoofing;
  double quality = 0.0;                 // [0, 1]
  std::optional<std::string> match_id;  // meaningful only when Bonafide

  bool operator==(const PipelineVerdict&) const = default;
};

// Counts anti-spoofing classifications against a hard limit. Thread-safe.
class QueryLedger {
 public:
  explicit QueryLedger(std::uint64_t limit);

  std::uint64_t count() const { return count_.load(); }
  std::uint64_t limit() const { return limit_.load(); }
  std::uint64_t headroom() const;

  // Atomically takes one query; throws QueryLimitExhausted when none is left.
  void acquire();
  // Returns a query taken by acquire() whose request never reached the oracle.
  void refund();
  // Raises the limit (verification batches may overrun the attack budget).
  void extend(std::uint64_t extra) { limit_ += extra; }

 private:
  std::atomic<std::uint64_t> count_{0};
  std::atomic<std::uint64_t> limit_;
};

// A pipeline implementation. Builtin oracles are pure and thread-safe;
// transport-backed ones serialize internally.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual PipelineVerdict query(const Image& img) = 0;
  virtual std::string describe() const = 0;
};

// One attack's view of an oracle: every classify() costs exactly one query.
class OracleSession {
 public:
  OracleSession(Oracle& oracle, std::uint64_t limit) : oracle_(&oracle), ledger_(limit) {}

  PipelineVerdict classify(const Image& img);
  QueryLedger& ledger() { return ledger_; }
  const QueryLedger& ledger() const { return ledger_; }

 private:
  Oracle* oracle_;
  QueryLedger ledger_;
};

// ---------------------------------------------------------------------------
// Identity matching

inline constexpr std::size_t kTemplateSize = 64;
inline constexpr double kDefaultMatchThreshold = 0.8;

// Zero-mean, unit-norm 64x64 grayscale vector. All zeros for flat images.
std::vector<double> make_template(const Image& img);

struct MatchResult {
  std::string identity;
  double score = 0.0;
};

class Gallery {
 public:
  void enroll(std::string identity, const Image& img);
  void enroll_template(std::string identity, std::vector<double> normalized);
  bool empty() const { return ids_.empty(); }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& identities() const { return ids_; }

  // Best normalized cross-correlation over the gallery; ties keep the earlier
  // enrollment. nullopt for an empty gallery.
  std::optional<MatchResult> best(const Image& img) const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::vector<double>> templates_;
};

// argmax identity iff its NCC >= threshold.
std::optional<std::string> match_identity(const Image& img, const Gallery& gallery,
                                          double threshold = kDefaultMatchThreshold);

// ---------------------------------------------------------------------------
// Builtin oracles

struct ColorGateParams {
  std::array<double, 3> secret_chroma{0.45, 0.10, 0.45};
  double tolerance = 0.08;
  double match_threshold = kDefaultMatchThreshold;

  void validate() const;
};

struct ImageStatistics {
  std::array<double, 3> channel_mean{};
  double gray_mean = 0.0;
  double saturated_fraction = 0.0;  // fraction of channel values equal to 0 or 255
};
ImageStatistics image_statistics(const Image& img);

// Bonafide iff the mean-channel chroma lies within tolerance of the secret.
// quality = max(0, 1 - |gray_mean - 128| / 128) * (1 - saturated_fraction).
// match_id is filled only for Bonafide verdicts.
PipelineVerdict colorgate_verdict(const Image& img, const ColorGateParams& params,
                                  const Gallery* gallery = nullptr);

class ColorGateOracle final : public Oracle {
 public:
  explicit ColorGateOracle(ColorGateParams params = {}, std::shared_ptr<const Gallery> gallery = nullptr);
  PipelineVerdict query(const Image& img) override;
  std::string describe() const override { return "builtin:colorgate"; }
  const ColorGateParams& params() const { return params_; }

 private:
  ColorGateParams params_;
  std::shared_ptr<const Gallery> gallery_;
};

class AlwaysSpoofOracle final : public Oracle {
 public:
  PipelineVerdict query(const Image&) override { return {Label::Spoofing, 0.5, std::nullopt}; }
  std::string describe() const override { return "builtin:always-spoof"; }
};

// ---------------------------------------------------------------------------
// Oracle selection

struct OracleSpec {
  enum class Kind { Colorgate, AlwaysSpoof, Exec, Http };
  Kind kind = Kind::Colorgate;
  std::string target;  // command line (exec) or base URL (http)

  // "builtin:colorgate", "builtin:always-spoof", "exec:<command>", "http:<url>"
  static OracleSpec parse(const std::string& text);
  std::string to_string() const;
};

struct TransportOptions {
  int max_retries = 3;
  int initial_backoff_ms = 50;
  int timeout_ms = 30000;
};

struct OracleOptions {
  ColorGateParams colorgate;
  std::shared_ptr<const Gallery> gallery;
  TransportOptions transport;
};

using OracleFactory = std::function<std::unique_ptr<Oracle>()>;

std::unique_ptr<Oracle> make_oracle(const OracleSpec& spec, const OracleOptions& options);
// Returns a factory producing independent backends (one per worker).
OracleFactory oracle_factory(const OracleSpec& spec, OracleOptions options);

}  // namespace chromafool
