#include "bayesun/checkpoint.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bayesun/blr.hpp"
#include "bayesun/mlp.hpp"

namespace bayesun::io {

const DiagGaussian& PosteriorCheckpoint::diag() const {
  if (!gaussian || !std::holds_alternative<DiagGaussian>(*gaussian)) {
    throw std::logic_error("checkpoint holds no diagonal Gaussian");
  }
  return std::get<DiagGaussian>(*gaussian);
}

const FullGaussian& PosteriorCheckpoint::full() const {
  if (!gaussian || !std::holds_alternative<FullGaussian>(*gaussian)) {
    throw std::logic_error("checkpoint holds no full-covariance Gaussian");
  }
  return std::get<FullGaussian>(*gaussian);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void emit_vector(YAML::Emitter& out, const Vector& v) {
  out << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]);
  out << YAML::EndSeq;
}

void emit_matrix(YAML::Emitter& out, const Matrix& m) {
  out << YAML::BeginSeq;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << format_double(m(r, c));
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
}

void emit_gaussian(YAML::Emitter& out, const std::variant<DiagGaussian, FullGaussian>& g) {
  out << YAML::BeginMap;
  if (const auto* d = std::get_if<DiagGaussian>(&g)) {
    out << YAML::Key << "form" << YAML::Value << "diag";
    out << YAML::Key << "mean" << YAML::Value;
    emit_vector(out, d->mean());
    out << YAML::Key << "var" << YAML::Value;
    emit_vector(out, d->var());
  } else {
    const auto& f = std::get<FullGaussian>(g);
    out << YAML::Key << "form" << YAML::Value << "full";
    out << YAML::Key << "mean" << YAML::Value;
    emit_vector(out, f.mean());
    out << YAML::Key << "cov" << YAML::Value;
    emit_matrix(out, f.cov());
  }
  out << YAML::EndMap;
}

}  // namespace

std::string to_text(const PosteriorCheckpoint& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << c.schema_version;
  out << YAML::Key << "method" << YAML::Value << c.method;
  out << YAML::Key << "architecture" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << c.architecture.kind;
  if (c.architecture.kind == "mlp") {
    out << YAML::Key << "hidden_units" << YAML::Value << c.architecture.hidden_units;
  } else {
    out << YAML::Key << "features" << YAML::Value << c.architecture.features;
  }
  out << YAML::EndMap;
  out << YAML::Key << "sigma" << YAML::Value << format_double(c.sigma);
  out << YAML::Key << "seed" << YAML::Value << c.seed;

  out << YAML::Key << "provenance" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "id" << YAML::Value << c.provenance.id;
  out << YAML::Key << "parent" << YAML::Value << c.provenance.parent;
  out << YAML::Key << "data_digest" << YAML::Value << c.provenance.data_digest;
  out << YAML::Key << "deleted_digest" << YAML::Value << c.provenance.deleted_digest;
  out << YAML::Key << "lambda" << YAML::Value;
  if (c.provenance.lambda) {
    out << format_double(*c.provenance.lambda);
  } else {
    out << YAML::Null;
  }
  out << YAML::Key << "command" << YAML::Value << c.provenance.command;
  out << YAML::EndMap;

  out << YAML::Key << "pathology" << YAML::Value;
  if (c.pathology) {
    const auto& p = *c.pathology;
    out << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(p.kind);
    out << YAML::Key << "detail" << YAML::Value << p.detail;
    out << YAML::Key << "offending_coords" << YAML::Value << YAML::Flow << p.offending_coords;
    out << YAML::Key << "min_eigenvalue" << YAML::Value;
    if (p.min_eigenvalue) {
      out << format_double(*p.min_eigenvalue);
    } else {
      out << YAML::Null;
    }
    out << YAML::EndMap;
  } else {
    out << YAML::Null;
  }

  out << YAML::Key << "prior" << YAML::Value;
  emit_gaussian(out, c.prior);
  out << YAML::Key << "gaussian" << YAML::Value;
  if (c.gaussian) {
    emit_gaussian(out, *c.gaussian);
  } else {
    out << YAML::Null;
  }
  out << YAML::Key << "theta_map" << YAML::Value;
  if (c.theta_map) {
    emit_vector(out, *c.theta_map);
  } else {
    out << YAML::Null;
  }
  out << YAML::Key << "natural" << YAML::Value;
  if (c.natural) {
    out << YAML::BeginMap;
    if (c.natural->is_diagonal()) {
      out << YAML::Key << "precision_diag" << YAML::Value;
      emit_vector(out, c.natural->precision_diag());
    } else {
      out << YAML::Key << "precision" << YAML::Value;
      emit_matrix(out, c.natural->precision_full());
    }
    out << YAML::Key << "shift" << YAML::Value;
    emit_vector(out, c.natural->shift);
    out << YAML::EndMap;
  } else {
    out << YAML::Null;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& field, const YAML::Node& n, const std::string& what) const {
    std::string where = field;
    const auto mark = n.Mark();
    if (mark.line >= 0) where += " (line " + std::to_string(mark.line + 1) + ")";
    throw ParseError(origin_, where, what);
  }

  YAML::Node require(const YAML::Node& parent, const std::string& key, const std::string& path) const {
    const auto n = parent[key];
    if (!n.IsDefined()) throw ParseError(origin_, path, "missing field");
    return n;
  }

  double real(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) fail(field, n, "expected a number");
    const auto& s = n.Scalar();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) fail(field, n, "not a number: '" + s + "'");
    return v;
  }

  template <class T>
  T scalar(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) fail(field, n, "expected a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception& e) {
      fail(field, n, "bad value '" + n.Scalar() + "'");
    }
  }

  Vector vector(const YAML::Node& n, const std::string& field) const {
    if (!n.IsSequence()) fail(field, n, "expected a sequence");
    Vector v(static_cast<Eigen::Index>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = real(n[i], field + "[" + std::to_string(i) + "]");
    }
    return v;
  }

  Matrix matrix(const YAML::Node& n, const std::string& field) const {
    if (!n.IsSequence()) fail(field, n, "expected a sequence of rows");
    const auto rows = static_cast<Eigen::Index>(n.size());
    Matrix m(rows, rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto row_name = field + "[" + std::to_string(r) + "]";
      const Vector row = vector(n[static_cast<std::size_t>(r)], row_name);
      if (row.size() != rows) fail(row_name, n[static_cast<std::size_t>(r)], "matrix is not square");
      m.row(r) = row.transpose();
    }
    return m;
  }

  std::variant<DiagGaussian, FullGaussian> gaussian(const YAML::Node& n, const std::string& field,
                                                    Eigen::Index dim) const {
    if (!n.IsMap()) fail(field, n, "expected a mapping");
    const auto form = scalar<std::string>(require(n, "form", field + ".form"), field + ".form");
    const Vector mean = vector(require(n, "mean", field + ".mean"), field + ".mean");
    if (dim >= 0 && mean.size() != dim) {
      fail(field + ".mean", n["mean"], "expected " + std::to_string(dim) + " entries, found " +
                                           std::to_string(mean.size()));
    }
    try {
      if (form == "diag") {
        const Vector var = vector(require(n, "var", field + ".var"), field + ".var");
        if (var.size() != mean.size()) fail(field + ".var", n["var"], "length differs from mean");
        return DiagGaussian(mean, var);
      }
      if (form == "full") {
        const Matrix cov = matrix(require(n, "cov", field + ".cov"), field + ".cov");
        if (cov.rows() != mean.size()) fail(field + ".cov", n["cov"], "size differs from mean");
        return FullGaussian(mean, cov);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      fail(field, n, e.what());
    }
    fail(field + ".form", n["form"], "unknown form '" + form + "'");
  }

 private:
  std::string origin_;
};

}  // namespace

PosteriorCheckpoint from_text(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(origin, "line " + std::to_string(e.mark.line + 1), e.msg);
  }
  Reader rd(origin);
  if (!root.IsMap()) throw ParseError(origin, "document", "expected a mapping");
  PosteriorCheckpoint c;
  c.schema_version = rd.scalar<int>(rd.require(root, "schema_version", "schema_version"), "schema_version");
  if (c.schema_version != kSchemaVersion) {
    throw ParseError(origin, "schema_version",
                     "unsupported schema version " + std::to_string(c.schema_version));
  }
  c.method = rd.scalar<std::string>(rd.require(root, "method", "method"), "method");
  const auto arch = rd.require(root, "architecture", "architecture");
  c.architecture.kind = rd.scalar<std::string>(rd.require(arch, "kind", "architecture.kind"), "architecture.kind");
  Eigen::Index dim = -1;
  if (c.architecture.kind == "mlp") {
    c.architecture.hidden_units =
        rd.scalar<int>(rd.require(arch, "hidden_units", "architecture.hidden_units"), "architecture.hidden_units");
    if (c.architecture.hidden_units < 0) rd.fail("architecture.hidden_units", arch["hidden_units"], "negative");
    dim = MlpArchitecture{c.architecture.hidden_units}.param_count();
  } else if (c.architecture.kind == "blr") {
    c.architecture.features =
        rd.scalar<std::string>(rd.require(arch, "features", "architecture.features"), "architecture.features");
    try {
      dim = blr::FeatureMap::parse(c.architecture.features).output_dim();
    } catch (const std::exception& e) {
      rd.fail("architecture.features", arch["features"], e.what());
    }
  } else {
    rd.fail("architecture.kind", arch["kind"], "unknown kind '" + c.architecture.kind + "'");
  }
  c.sigma = rd.real(rd.require(root, "sigma", "sigma"), "sigma");
  c.seed = rd.scalar<std::uint64_t>(rd.require(root, "seed", "seed"), "seed");

  const auto prov = rd.require(root, "provenance", "provenance");
  c.provenance.id = rd.scalar<std::string>(rd.require(prov, "id", "provenance.id"), "provenance.id");
  c.provenance.parent = rd.scalar<std::string>(rd.require(prov, "parent", "provenance.parent"), "provenance.parent");
  c.provenance.data_digest =
      rd.scalar<std::string>(rd.require(prov, "data_digest", "provenance.data_digest"), "provenance.data_digest");
  c.provenance.deleted_digest = rd.scalar<std::string>(
      rd.require(prov, "deleted_digest", "provenance.deleted_digest"), "provenance.deleted_digest");
  const auto lam = rd.require(prov, "lambda", "provenance.lambda");
  if (!lam.IsNull()) c.provenance.lambda = rd.real(lam, "provenance.lambda");
  c.provenance.command =
      rd.scalar<std::string>(rd.require(prov, "command", "provenance.command"), "provenance.command");

  const auto path = rd.require(root, "pathology", "pathology");
  if (!path.IsNull()) {
    PathologyReport p;
    const auto kind = rd.scalar<std::string>(rd.require(path, "kind", "pathology.kind"), "pathology.kind");
    try {
      p.kind = parse_pathology_kind(kind);
    } catch (const std::exception& e) {
      rd.fail("pathology.kind", path["kind"], e.what());
    }
    p.detail = rd.scalar<std::string>(rd.require(path, "detail", "pathology.detail"), "pathology.detail");
    const auto coords = rd.require(path, "offending_coords", "pathology.offending_coords");
    if (!coords.IsSequence()) rd.fail("pathology.offending_coords", coords, "expected a sequence");
    for (std::size_t i = 0; i < coords.size(); ++i) {
      p.offending_coords.push_back(rd.scalar<std::size_t>(coords[i], "pathology.offending_coords"));
    }
    const auto mev = rd.require(path, "min_eigenvalue", "pathology.min_eigenvalue");
    if (!mev.IsNull()) p.min_eigenvalue = rd.real(mev, "pathology.min_eigenvalue");
    c.pathology = std::move(p);
  }

  c.prior = rd.gaussian(rd.require(root, "prior", "prior"), "prior", dim);
  const auto g = rd.require(root, "gaussian", "gaussian");
  if (!g.IsNull()) c.gaussian = rd.gaussian(g, "gaussian", dim);
  const auto tm = rd.require(root, "theta_map", "theta_map");
  if (!tm.IsNull()) {
    c.theta_map = rd.vector(tm, "theta_map");
    if (c.theta_map->size() != dim) rd.fail("theta_map", tm, "length differs from parameter count");
  }
  const auto nat = rd.require(root, "natural", "natural");
  if (!nat.IsNull()) {
    NaturalGaussian n;
    if (nat["precision_diag"].IsDefined()) {
      n.precision = rd.vector(nat["precision_diag"], "natural.precision_diag");
    } else {
      n.precision = rd.matrix(rd.require(nat, "precision", "natural.precision"), "natural.precision");
    }
    n.shift = rd.vector(rd.require(nat, "shift", "natural.shift"), "natural.shift");
    if (n.shift.size() != dim) rd.fail("natural.shift", nat["shift"], "length differs from parameter count");
    c.natural = std::move(n);
  }
  if (!c.gaussian && !c.pathology) {
    throw ParseError(origin, "gaussian", "absent without a pathology record");
  }
  return c;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << contents;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void save_checkpoint(const PosteriorCheckpoint& c, const std::string& path) { write_file(path, to_text(c)); }

PosteriorCheckpoint load_checkpoint(const std::string& path) { return from_text(read_file(path), path); }

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
  return os.str();
}

std::string dataset_csv(const Dataset& d) {
  std::string out = "x,y,sigma\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    out += format_double(d.x[i]) + "," + format_double(d.y[i]) + "," + format_double(d.sigma) + "\n";
  }
  return out;
}

std::string dataset_digest(const Dataset& d) { return sha256_hex(dataset_csv(d)); }

std::string checkpoint_id(const PosteriorCheckpoint& c) {
  auto copy = c;
  copy.provenance.id.clear();
  return sha256_hex(to_text(copy)).substr(0, 16);
}

void save_dataset(const Dataset& d, const std::string& path) { write_file(path, dataset_csv(d)); }

Dataset load_dataset(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, "line 1", "empty file");
  if (line != "x,y,sigma") throw ParseError(path, "line 1", "expected header 'x,y,sigma'");
  std::vector<double> xs;
  std::vector<double> ys;
  std::optional<double> sigma;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 3> vals{};
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      const auto next = k < 2 ? line.find(',', pos) : line.size();
      if (next == std::string::npos) {
        throw ParseError(path, "line " + std::to_string(lineno), "expected 3 columns");
      }
      const std::string cell = line.substr(pos, next - pos);
      char* end = nullptr;
      vals[static_cast<std::size_t>(k)] = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw ParseError(path, "line " + std::to_string(lineno), "not a number: '" + cell + "'");
      }
      pos = next + 1;
    }
    if (sigma && *sigma != vals[2]) {
      throw ParseError(path, "line " + std::to_string(lineno), "sigma differs from earlier rows");
    }
    sigma = vals[2];
    xs.push_back(vals[0]);
    ys.push_back(vals[1]);
  }
  return Dataset(std::move(xs), std::move(ys), sigma.value_or(0.0));
}

}  // namespace bayesun::io
