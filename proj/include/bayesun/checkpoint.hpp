#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "bayesun/dataset.hpp"
#include "bayesun/gaussian.hpp"
#include "bayesun/pathology.hpp"

namespace bayesun::io {

inline constexpr int kSchemaVersion = 1;

/// Malformed checkpoint or data file. `where` names the field or line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, const std::string& where, const std::string& what)
      : std::runtime_error(file + ": " + where + ": " + what), where_(where) {}
  [[nodiscard]] const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// Model whose parameters the Gaussian describes.
struct Architecture {
  std::string kind = "mlp";  ///< "mlp" or "blr"
  int hidden_units = 50;     ///< mlp only
  std::string features;      ///< blr only, FeatureMap::to_string form
};

struct Provenance {
  std::string id;
  std::string parent;          ///< id of the checkpoint this one was derived from
  std::string deleted_digest;  ///< SHA-256 of the deleted data, unlearning only
  std::string data_digest;     ///< SHA-256 of the data the posterior was fitted on
  std::optional<double> lambda;
  std::string command;
};

struct PosteriorCheckpoint {
  int schema_version = kSchemaVersion;
  std::string method;  ///< blr, laplace, vi, lbun, vbun
  Architecture architecture;
  /// Absent for pathological results, which keep their natural parameters instead.
  std::optional<std::variant<DiagGaussian, FullGaussian>> gaussian;
  std::optional<NaturalGaussian> natural;
  std::optional<Vector> theta_map;
  std::variant<DiagGaussian, FullGaussian> prior = DiagGaussian(Vector::Zero(1), Vector::Ones(1));
  double sigma = 0.1;
  std::uint64_t seed = 0;
  Provenance provenance;
  std::optional<PathologyReport> pathology;

  [[nodiscard]] bool usable_for_prediction() const {
    return gaussian.has_value() && (!pathology || pathology->kind == PathologyKind::valid);
  }
  [[nodiscard]] const DiagGaussian& diag() const;
  [[nodiscard]] const FullGaussian& full() const;
};

/// 17 significant digits: parses back to the same double.
std::string format_double(double v);

std::string to_text(const PosteriorCheckpoint& c);
PosteriorCheckpoint from_text(const std::string& text, const std::string& origin = "<string>");

void save_checkpoint(const PosteriorCheckpoint& c, const std::string& path);
PosteriorCheckpoint load_checkpoint(const std::string& path);

/// Hex SHA-256.
std::string sha256_hex(const std::string& bytes);
/// Digest over the CSV serialization of `d`.
std::string dataset_digest(const Dataset& d);
/// Content id: digest of the checkpoint text with the id field left empty.
std::string checkpoint_id(const PosteriorCheckpoint& c);

/// CSV with header x,y,sigma.
std::string dataset_csv(const Dataset& d);
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace bayesun::io
