#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "corrdetect/detectors.hpp"
#include "corrdetect/exponents.hpp"
#include "corrdetect/likelihood.hpp"
#include "corrdetect/model.hpp"
#include "corrdetect/partitions.hpp"
#include "corrdetect/risk.hpp"

namespace corrdetect::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Column order of the sweep CSV. The trailing `note` column carries per-row
// errors and flags; readers that only know the first sixteen can ignore it.
const std::vector<std::string>& sweep_columns();

json to_json(const ModelParams& p);
ModelParams params_from_json(const json& j);
json to_json(const MomentEstimate& m, const ModelParams& p);
json to_json(const ExponentProfile& e);
json to_json(const CountTestConfig& c);
CountTestConfig count_config_from_json(const json& j);
json to_json(const ComparisonTestConfig& c);
json to_json(const RiskEstimate& r);
json to_json(const LowerBound& b);
json to_json(const ConditionReport& c);
json to_json(const SweepRow& r);

// Numbers print with 17 significant digits; NaN prints as an empty field.
std::string format_double(double v);

void write_sweep_header(std::ostream& os);
void write_sweep_row(std::ostream& os, const SweepRow& r);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

// Parses a sweep CSV written by write_sweep_csv. Throws std::runtime_error on
// a header mismatch or a malformed line.
std::vector<SweepRow> read_sweep_csv(std::istream& is);
std::set<SweepKey> completed_keys(const std::vector<SweepRow>& rows);

json sweep_json(const std::vector<SweepRow>& rows);

// Every row is one Par(m, l) entry; counts as decimal strings.
void write_partition_table_csv(std::ostream& os, const PartitionTable& table);

// Pair dumps: text lists "matrix,i,j,value" rows; binary is the header
// (n, d as little-endian u64) followed by X then Y row-major as f64.
void write_pair_csv(std::ostream& os, const DatabasePair& pair);
void write_pair_binary(std::ostream& os, const DatabasePair& pair);
DatabasePair read_pair_binary(std::istream& is);

}  // namespace corrdetect::io
