#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "brand/functional.hpp"
#include "brand/postprocess.hpp"
#include "brand/robust_prior.hpp"
#include "brand/sampler.hpp"

namespace brand::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);

/// Numeric CSV: an optional header row and rows of equal width. Without
/// `has_header` the first row is a header when one of its fields is not a number.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

CsvTable read_csv(const fs::path& path, std::optional<bool> has_header = std::nullopt);
void write_csv(const fs::path& path, const Matrix& values, const std::vector<std::string>& header = {});

/// Rows of features, with the class label in the last column when has_labels.
LabeledDataset load_multivariate(const fs::path& path, bool has_labels);
void write_multivariate(const fs::path& path, const Matrix& data, const std::vector<int>& labels = {});

/// Wide: one row per curve, header = time stamps, optional leading "label" column.
/// Columnar: first column the time grid, one column per curve; an optional
/// first data row starting with "label" carries class labels.
enum class CurveLayout { Wide, Columnar };

CurveLayout parse_layout(const std::string& name);
functional::CurveSet load_curves(const fs::path& path, CurveLayout layout);
void write_curves(const fs::path& path, const functional::CurveSet& curves, CurveLayout layout = CurveLayout::Wide);

std::vector<int> read_labels(const fs::path& path);
void write_labels(const fs::path& path, const std::vector<int>& labels);

/// Flat `key = value` text; `#` starts a comment.
using KeyValues = std::map<std::string, std::string>;
KeyValues read_config(const fs::path& path);
/// Parses `key=value` overrides given on the command line.
KeyValues parse_overrides(const std::vector<std::string>& items);

Json to_json(const RobustClassSummary& s);
RobustClassSummary robust_from_json(const Json& j);
Json to_json(const functional::FunctionalKnownPrior& p);
functional::FunctionalKnownPrior functional_prior_from_json(const Json& j);
Json to_json(const Metrics& m);

void write_json(const fs::path& path, const Json& j);
Json read_json(const fs::path& path);

/// Chain directory: meta.json plus traces/ (alpha, beta as raw little-endian
/// int32 when binary, CSV otherwise; pi, gamma, n_active as CSV) and atoms.json.
void write_chain(const fs::path& dir, const ChainOutput& chain, bool binary = true);
ChainOutput read_chain(const fs::path& dir);

/// summary/: labels.csv (unit,label,ppn,anomaly), ppcm.bin + ppcm.json,
/// partition.csv and metrics.json when metrics are present.
void write_summary(const fs::path& dir, const PosteriorSummary& summary);

/// Git blob hash ("blob <size>\0" + content, SHA-1) of a file.
std::string git_blob_sha1(const fs::path& path);

/// manifest.json: command, config echo, seed and content hashes of the inputs.
void write_manifest(const fs::path& dir, const std::string& command, const Json& config, std::uint64_t seed,
                    const std::vector<fs::path>& inputs);

}  // namespace brand::io
