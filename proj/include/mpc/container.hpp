#pragma once

// Binary record container ("MPC1"), little-endian:
//   magic "MPC1" | u32 version (1) | u32 record count
//   per record: u32 id length | id bytes (UTF-8) | u32 N | N*3 float32 xyz
//               | u8 has_labels [N * u16] | u8 has_factors [u32 F | F * float32]
// Partial datasets carry method metadata in "<file>.meta.json".

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mpc/data.hpp"

namespace mpc::container {

inline constexpr char kMagic[4] = {'M', 'P', 'C', '1'};
inline constexpr std::uint32_t kVersion = 1;

struct Record {
  std::string id;
  std::vector<float> xyz;  // 3 * N
  std::optional<std::vector<std::uint16_t>> labels;
  std::optional<std::vector<float>> factors;

  std::size_t point_count() const { return xyz.size() / 3; }
  friend bool operator==(const Record&, const Record&) = default;
};

std::vector<std::uint8_t> encode(const std::vector<Record>& records);
// Throws FormatError naming the byte offset of the first bad field.
std::vector<Record> decode(const std::vector<std::uint8_t>& bytes);

void write_file(const std::filesystem::path& path, const std::vector<Record>& records);
std::vector<Record> read_file(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

// FNV-1a 64 of a file's bytes, hex encoded; used in manifests.
std::string file_hash(const std::filesystem::path& path);
std::string bytes_hash(const std::vector<std::uint8_t>& bytes);

Record to_record(const data::ShapeRecord& shape);
data::ShapeRecord to_shape(const Record& rec);
Record cloud_record(const std::string& id, const geometry::PointCloud& cloud);
geometry::PointCloud cloud_of(const Record& rec);

// Complete-shape datasets.
void write_dataset(const std::filesystem::path& path, const std::vector<data::ShapeRecord>& shapes);
std::vector<data::ShapeRecord> read_dataset(const std::filesystem::path& path);

// Partial datasets: container plus JSON sidecar.
std::filesystem::path sidecar_path(const std::filesystem::path& path);
void write_partials(const std::filesystem::path& path, const std::vector<data::PartialRecord>& partials);
std::vector<data::PartialRecord> read_partials(const std::filesystem::path& path);

}  // namespace mpc::container
