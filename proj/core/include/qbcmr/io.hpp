#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qbcmr/models.hpp"

namespace qbcmr {

/// All floats in output artifacts are serialized with 17 significant digits
/// so artifacts are bytes-identical across reruns.
std::string format_g17(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Flat JSON-lines records with deterministic key order.
using JsonValue = std::variant<double, std::int64_t, std::uint64_t, bool, std::string>;
using JsonRecord = std::vector<std::pair<std::string, JsonValue>>;

std::string to_json_line(const JsonRecord& record);
void write_results(const std::vector<JsonRecord>& records, const std::filesystem::path& path);

/// Dataset persistence: header X1..Xd,Y,W1..Wdw.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace qbcmr
