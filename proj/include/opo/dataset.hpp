#ifndef OPO_DATASET_HPP
#define OPO_DATASET_HPP

// The published operating-point numbers shipped with the tool, and the
// end-to-end reproduction check run against them.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace opo {

struct PaperQuantity {
  double value{};
  std::optional<double> uncertainty;
  std::string unit;
  std::string anchor;  ///< where the number comes from in the source
};

struct PaperRecord {
  std::string id;
  std::string description;
  std::map<std::string, PaperQuantity> quantities;

  /// Throws ValidationError("<id>.<key>") if absent.
  const PaperQuantity& at(const std::string& key) const;
};

struct PaperDataset {
  std::vector<PaperRecord> records;

  const PaperRecord& record(const std::string& id) const;
};

PaperDataset parse_dataset(const nlohmann::json& j);
PaperDataset load_dataset(const std::filesystem::path& path);

/// The dataset compiled into the library.
const PaperDataset& embedded_dataset();

/// Id of the record the reproduction check runs on.
inline constexpr const char* operating_point_record = "crystal-1-250mW";

struct CheckOutcome {
  std::string id;  ///< "C1" ... "C6"
  std::string title;
  bool pass{};
  std::string detail;
};

/// Reproduces the operating-point chain (efficiencies, detuning, theory
/// levels, phase-noise corrected levels, jitter fit) from the record's
/// inputs and compares each against the record's quoted value.
std::vector<CheckOutcome> run_paper_checks(const PaperDataset& data);

}  // namespace opo

#endif  // OPO_DATASET_HPP
