#include "brand/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <openssl/evp.h>

#include "brand/error.hpp"

namespace brand::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> try_parse(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  return out;
}

int to_label(double x, const fs::path& path, Eigen::Index row) {
  if (x != std::floor(x) || x < 0.0) {
    throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(row + 1) + ": label " + format_double(x) +
                                           " is not a non-negative integer");
  }
  return static_cast<int>(x);
}

std::string read_text(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_int_trace(const fs::path& path, const IntTrace& trace, bool binary) {
  if (binary) {
    auto out = open_out(path, std::ios::binary);
    static_assert(std::endian::native == std::endian::little, "binary traces assume a little-endian host");
    out.write(reinterpret_cast<const char*>(trace.data().data()),
              static_cast<std::streamsize>(trace.data().size() * sizeof(std::int32_t)));
    return;
  }
  auto out = open_out(path);
  for (int i = 0; i < trace.rows(); ++i) {
    for (int m = 0; m < trace.cols(); ++m) {
      if (m > 0) out << ',';
      out << trace(i, m);
    }
    out << '\n';
  }
}

IntTrace read_int_trace(const fs::path& path, int rows, int cols, bool binary) {
  IntTrace trace(rows, cols);
  if (binary) {
    auto in = open_in(path, std::ios::binary);
    const auto bytes = static_cast<std::streamsize>(trace.data().size() * sizeof(std::int32_t));
    in.read(reinterpret_cast<char*>(trace.data().data()), bytes);
    if (in.gcount() != bytes) throw Error(ErrorCode::IoError, path.string() + " is shorter than its recorded shape");
    return trace;
  }
  const CsvTable t = read_csv(path);
  if (t.values.rows() != rows || t.values.cols() != cols) {
    throw Error(ErrorCode::DimensionMismatch, path.string() + " does not match its recorded shape");
  }
  for (int i = 0; i < rows; ++i) {
    for (int m = 0; m < cols; ++m) trace(i, m) = static_cast<std::int32_t>(t.values(i, m));
  }
  return trace;
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix matrix_from(const Json& j) {
  Matrix m(static_cast<Eigen::Index>(j.size()), j.empty() ? 0 : static_cast<Eigen::Index>(j[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

Json atom_json(const AtomRecord& r) {
  return Json{{"id", r.id}, {"location", vector_json(r.location)}, {"spread", matrix_json(r.spread)}};
}

AtomRecord atom_from(const Json& j) {
  return AtomRecord{j.at("id").get<int>(), vector_from(j.at("location")), matrix_from(j.at("spread"))};
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error(ErrorCode::IoError, "cannot format number");
  return {buf, ptr};
}

double parse_double(std::string_view text) {
  const auto v = try_parse(trim(text));
  if (!v) throw Error(ErrorCode::ParseError, "cannot parse '" + std::string(text) + "' as a number");
  return *v;
}

CsvTable read_csv(const fs::path& path, std::optional<bool> has_header) {
  auto in = open_in(path);
  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (rows.empty() && table.header.empty()) {
      bool numeric = true;
      for (auto f : fields) numeric = numeric && try_parse(f).has_value();
      if (has_header.value_or(!numeric)) {
        for (auto f : fields) table.header.emplace_back(f);
        width = fields.size();
        continue;
      }
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(line_no) + " has " +
                                             std::to_string(fields.size()) + " fields, expected " + std::to_string(width));
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      const auto v = try_parse(fields[c]);
      if (!v) {
        throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(line_no) + ", column " +
                                               std::to_string(c + 1) + ": cannot parse '" + std::string(fields[c]) + "'");
      }
      row[c] = *v;
    }
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < width; ++c) table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  return table;
}

void write_csv(const fs::path& path, const Matrix& values, const std::vector<std::string>& header) {
  auto out = open_out(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c > 0 ? "," : "") << header[c];
  if (!header.empty()) out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << (c > 0 ? "," : "") << format_double(values(i, c));
    out << '\n';
  }
}

LabeledDataset load_multivariate(const fs::path& path, bool has_labels) {
  const CsvTable t = read_csv(path);
  LabeledDataset out;
  if (!has_labels) {
    out.data = t.values;
    return out;
  }
  if (t.values.cols() < 2) throw Error(ErrorCode::DimensionMismatch, path.string() + " needs features and a label column");
  out.data = t.values.leftCols(t.values.cols() - 1);
  out.labels.resize(static_cast<std::size_t>(t.values.rows()));
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) out.labels[static_cast<std::size_t>(i)] = to_label(t.values(i, t.values.cols() - 1), path, i);
  return out;
}

void write_multivariate(const fs::path& path, const Matrix& data, const std::vector<int>& labels) {
  std::vector<std::string> header;
  for (Eigen::Index c = 0; c < data.cols(); ++c) header.push_back("x" + std::to_string(c + 1));
  if (labels.empty()) {
    write_csv(path, data, header);
    return;
  }
  if (static_cast<Eigen::Index>(labels.size()) != data.rows()) throw Error(ErrorCode::LengthMismatch, "label count differs from rows");
  header.emplace_back("label");
  Matrix full(data.rows(), data.cols() + 1);
  full << data, Eigen::Map<const Eigen::VectorXi>(labels.data(), data.rows()).cast<double>();
  write_csv(path, full, header);
}

CurveLayout parse_layout(const std::string& name) {
  if (name == "wide") return CurveLayout::Wide;
  if (name == "columnar") return CurveLayout::Columnar;
  throw Error(ErrorCode::InvalidArgument, "unknown curve layout '" + name + "' (expected wide or columnar)");
}

functional::CurveSet load_curves(const fs::path& path, CurveLayout layout) {
  functional::CurveSet out;
  if (layout == CurveLayout::Wide) {
    const CsvTable t = read_csv(path, true);
    if (t.header.empty()) throw Error(ErrorCode::ParseError, path.string() + ": wide layout needs a header of time stamps");
    const bool labelled = t.header.front() == "label";
    const std::size_t first = labelled ? 1 : 0;
    out.grid.resize(static_cast<Eigen::Index>(t.header.size() - first));
    for (std::size_t c = first; c < t.header.size(); ++c) {
      const auto v = try_parse(t.header[c]);
      if (!v) {
        throw Error(ErrorCode::ParseError, path.string() + ": row 1, column " + std::to_string(c + 1) + ": time stamp '" +
                                               t.header[c] + "' is not a number");
      }
      out.grid[static_cast<Eigen::Index>(c - first)] = *v;
    }
    out.values = t.values.rightCols(out.grid.size());
    if (labelled) {
      for (Eigen::Index i = 0; i < t.values.rows(); ++i) out.labels.push_back(to_label(t.values(i, 0), path, i));
    }
  } else {
    // Columnar files may carry a "label" row, so parse by hand.
    auto in = open_in(path);
    std::string line;
    long line_no = 0;
    std::vector<double> grid;
    std::vector<std::vector<double>> columns;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto fields = split(line);
      if (fields.size() < 2) throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(line_no) + " has no curves");
      if (fields[0] == "label") {
        for (std::size_t c = 1; c < fields.size(); ++c) {
          const auto v = try_parse(fields[c]);
          if (!v) throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) + ": bad label");
          out.labels.push_back(to_label(*v, path, line_no - 1));
        }
        continue;
      }
      const auto t0 = try_parse(fields[0]);
      if (!t0) {
        if (grid.empty() && columns.empty()) continue;  // header row
        throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(line_no) + ", column 1: cannot parse '" + std::string(fields[0]) + "'");
      }
      if (columns.empty()) columns.resize(fields.size() - 1);
      if (fields.size() - 1 != columns.size()) {
        throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) + " fields, expected " + std::to_string(columns.size() + 1));
      }
      grid.push_back(*t0);
      for (std::size_t c = 1; c < fields.size(); ++c) {
        const auto v = try_parse(fields[c]);
        if (!v) throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) + ": cannot parse '" + std::string(fields[c]) + "'");
        columns[c - 1].push_back(*v);
      }
    }
    out.grid = Eigen::Map<const Vector>(grid.data(), static_cast<Eigen::Index>(grid.size()));
    out.values.resize(static_cast<Eigen::Index>(columns.size()), out.grid.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out.values.row(static_cast<Eigen::Index>(c)) = Eigen::Map<const Vector>(columns[c].data(), out.grid.size()).transpose();
    }
  }
  out.validate();
  return out;
}

void write_curves(const fs::path& path, const functional::CurveSet& curves, CurveLayout layout) {
  auto out = open_out(path);
  const bool labelled = !curves.labels.empty();
  if (layout == CurveLayout::Wide) {
    if (labelled) out << "label";
    for (Eigen::Index t = 0; t < curves.grid.size(); ++t) out << (t > 0 || labelled ? "," : "") << format_double(curves.grid[t]);
    out << '\n';
    for (Eigen::Index i = 0; i < curves.values.rows(); ++i) {
      if (labelled) out << curves.labels[static_cast<std::size_t>(i)];
      for (Eigen::Index t = 0; t < curves.grid.size(); ++t) out << (t > 0 || labelled ? "," : "") << format_double(curves.values(i, t));
      out << '\n';
    }
    return;
  }
  out << "t";
  for (Eigen::Index i = 0; i < curves.values.rows(); ++i) out << ",curve" << i + 1;
  out << '\n';
  if (labelled) {
    out << "label";
    for (int l : curves.labels) out << ',' << l;
    out << '\n';
  }
  for (Eigen::Index t = 0; t < curves.grid.size(); ++t) {
    out << format_double(curves.grid[t]);
    for (Eigen::Index i = 0; i < curves.values.rows(); ++i) out << ',' << format_double(curves.values(i, t));
    out << '\n';
  }
}

std::vector<int> read_labels(const fs::path& path) {
  const CsvTable t = read_csv(path);
  // Single column of labels, or the label column of a labels.csv summary.
  Eigen::Index col = 0;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (t.header[c] == "label") col = static_cast<Eigen::Index>(c);
  }
  std::vector<int> out;
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) out.push_back(to_label(t.values(i, col), path, i));
  return out;
}

void write_labels(const fs::path& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  out << "label\n";
  for (int l : labels) out << l << '\n';
}

KeyValues read_config(const fs::path& path) {
  auto in = open_in(path);
  KeyValues out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(line_no) + ": expected key = value");
    }
    out[std::string(trim(view.substr(0, eq)))] = std::string(trim(view.substr(eq + 1)));
  }
  return out;
}

KeyValues parse_overrides(const std::vector<std::string>& items) {
  KeyValues out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "override '" + item + "' is not key=value");
    out[std::string(trim(std::string_view(item).substr(0, eq)))] = std::string(trim(std::string_view(item).substr(eq + 1)));
  }
  return out;
}

Json to_json(const RobustClassSummary& s) {
  return Json{{"method", to_string(s.method)},
              {"mean", vector_json(s.mean)},
              {"scatter", matrix_json(s.scatter)},
              {"untrimmed", s.untrimmed},
              {"determinant", s.determinant},
              {"rho", s.rho},
              {"consistency", s.consistency}};
}

RobustClassSummary robust_from_json(const Json& j) {
  RobustClassSummary s;
  s.method = j.at("method").get<std::string>() == "MRCD" ? RobustMethod::MRCD : RobustMethod::MCD;
  s.mean = vector_from(j.at("mean"));
  s.scatter = matrix_from(j.at("scatter"));
  s.untrimmed = j.at("untrimmed").get<IndexList>();
  s.determinant = j.value("determinant", 0.0);
  s.rho = j.value("rho", 0.0);
  s.consistency = j.value("consistency", 1.0);
  if (s.scatter.rows() != s.mean.size() || s.scatter.cols() != s.mean.size()) {
    throw Error(ErrorCode::DimensionMismatch, "prior scatter does not match the mean dimension");
  }
  return s;
}

Json to_json(const functional::FunctionalKnownPrior& p) {
  return Json{{"grid", vector_json(p.grid)},
              {"mean_curve", vector_json(p.mean_curve)},
              {"noise_curve", vector_json(p.noise_curve)},
              {"phi", p.phi},
              {"v", p.v},
              {"robust", to_json(p.robust)}};
}

functional::FunctionalKnownPrior functional_prior_from_json(const Json& j) {
  functional::FunctionalKnownPrior p;
  p.grid = vector_from(j.at("grid"));
  p.mean_curve = vector_from(j.at("mean_curve"));
  p.noise_curve = vector_from(j.at("noise_curve"));
  p.phi = j.value("phi", 0.0);
  p.v = j.value("v", 0.0);
  if (j.contains("robust")) p.robust = robust_from_json(j.at("robust"));
  return p;
}

Json to_json(const Metrics& m) {
  auto num = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  return Json{{"ari", num(m.ari)}, {"novelty_precision", num(m.novelty_precision)}, {"known_accuracy", num(m.known_accuracy)}};
}

void write_json(const fs::path& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_chain(const fs::path& dir, const ChainOutput& chain, bool binary) {
  const fs::path traces = dir / "traces";
  fs::create_directories(traces);
  write_json(dir / "meta.json", Json{{"n_retained", chain.n_retained()},
                                     {"n_units", chain.n_units()},
                                     {"n_known", chain.n_known()},
                                     {"seed", chain.seed},
                                     {"format", binary ? "bin" : "csv"}});
  const std::string ext = binary ? ".bin" : ".csv";
  write_int_trace(traces / ("alpha" + ext), chain.alpha_trace, binary);
  write_int_trace(traces / ("beta" + ext), chain.beta_trace, binary);
  std::vector<std::string> pi_header;
  for (Eigen::Index j = 0; j < chain.pi_trace.cols(); ++j) pi_header.push_back("pi" + std::to_string(j));
  write_csv(traces / "pi.csv", chain.pi_trace, pi_header);
  Matrix scalars(chain.n_retained(), 2);
  for (int i = 0; i < chain.n_retained(); ++i) {
    scalars(i, 0) = chain.gamma_trace[i];
    scalars(i, 1) = chain.n_active_trace[static_cast<std::size_t>(i)];
  }
  write_csv(traces / "scalars.csv", scalars, {"gamma", "n_active"});
  Json atoms = Json::array();
  for (const auto& snap : chain.atom_snapshots) {
    Json known = Json::array(), novel = Json::array();
    for (const auto& r : snap.known) known.push_back(atom_json(r));
    for (const auto& r : snap.novel) novel.push_back(atom_json(r));
    atoms.push_back(Json{{"iteration", snap.iteration}, {"known", known}, {"novel", novel}});
  }
  write_json(traces / "atoms.json", atoms);
}

ChainOutput read_chain(const fs::path& dir) {
  const Json meta = read_json(dir / "meta.json");
  const int rows = meta.at("n_retained").get<int>();
  const int cols = meta.at("n_units").get<int>();
  const bool binary = meta.at("format").get<std::string>() == "bin";
  const std::string ext = binary ? ".bin" : ".csv";
  const fs::path traces = dir / "traces";
  ChainOutput chain;
  chain.seed = meta.at("seed").get<std::uint64_t>();
  chain.alpha_trace = read_int_trace(traces / ("alpha" + ext), rows, cols, binary);
  chain.beta_trace = read_int_trace(traces / ("beta" + ext), rows, cols, binary);
  chain.pi_trace = read_csv(traces / "pi.csv").values;
  if (chain.pi_trace.rows() != rows || chain.pi_trace.cols() != meta.at("n_known").get<int>() + 1) {
    throw Error(ErrorCode::DimensionMismatch, "pi trace does not match meta.json");
  }
  const Matrix scalars = read_csv(traces / "scalars.csv").values;
  if (scalars.rows() != rows) throw Error(ErrorCode::DimensionMismatch, "scalar trace does not match meta.json");
  chain.gamma_trace = scalars.col(0);
  for (int i = 0; i < rows; ++i) chain.n_active_trace.push_back(static_cast<int>(scalars(i, 1)));
  if (fs::exists(traces / "atoms.json")) {
    for (const auto& s : read_json(traces / "atoms.json")) {
      AtomSnapshot snap;
      snap.iteration = s.at("iteration").get<int>();
      for (const auto& r : s.at("known")) snap.known.push_back(atom_from(r));
      for (const auto& r : s.at("novel")) snap.novel.push_back(atom_from(r));
      chain.atom_snapshots.push_back(std::move(snap));
    }
  }
  return chain;
}

void write_summary(const fs::path& dir, const PosteriorSummary& summary) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "labels.csv");
    out << "unit,label,ppn,anomaly\n";
    for (std::size_t m = 0; m < summary.labels.size(); ++m) {
      out << m << ',' << summary.labels[m] << ',' << format_double(summary.ppn[static_cast<Eigen::Index>(m)]) << ','
          << (summary.anomaly_flags[m] ? 1 : 0) << '\n';
    }
  }
  const Matrix& p = summary.ppcm.probability;
  {
    auto out = open_out(dir / "ppcm.bin", std::ios::binary);
    out.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(p.size() * sizeof(double)));
  }
  Json missing = Json::array();
  for (const auto& [a, b] : summary.ppcm.missing) missing.push_back({a, b});
  write_json(dir / "ppcm.json", Json{{"n", p.rows()}, {"dtype", "float64"}, {"order", "column-major"},
                                     {"units", summary.ppcm.units}, {"missing_pairs", missing}});
  {
    auto out = open_out(dir / "partition.csv");
    out << "unit,cluster,anomaly\n";
    for (std::size_t k = 0; k < summary.best_partition.size(); ++k) {
      const int unit = summary.ppcm.units[k];
      out << unit << ',' << summary.best_partition[k] << ',' << (summary.anomaly_flags[static_cast<std::size_t>(unit)] ? 1 : 0)
          << '\n';
    }
  }
  Json info{{"n_units", summary.labels.size()},
            {"n_novelty_units", summary.ppcm.units.size()},
            {"n_candidate_partitions", summary.n_candidates},
            {"min_size", summary.min_size}};
  if (summary.metrics) {
    info["metrics"] = to_json(*summary.metrics);
    write_json(dir / "metrics.json", to_json(*summary.metrics));
  }
  write_json(dir / "summary.json", info);
}

std::string git_blob_sha1(const fs::path& path) {
  const std::string content = read_text(path);
  const std::string head = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const bool ok = ctx != nullptr && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, head.data(), head.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 && EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error(ErrorCode::IoError, "SHA-1 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

void write_manifest(const fs::path& dir, const std::string& command, const Json& config, std::uint64_t seed,
                    const std::vector<fs::path>& inputs) {
  Json files = Json::array();
  for (const auto& p : inputs) files.push_back(Json{{"path", p.string()}, {"git_blob_sha1", git_blob_sha1(p)}});
  write_json(dir / "manifest.json", Json{{"command", command}, {"seed", seed}, {"config", config}, {"inputs", files}});
}

}  // namespace brand::io
