#include <gtest/gtest.h>

#include <filesystem>

#include "mpc/container.hpp"
#include "mpc/error.hpp"

namespace mpc::container {
namespace {

std::vector<Record> sample_records() {
  Record a{"a", {0.f, 1.f, 2.f, 3.f, 4.f, 5.f}, std::vector<std::uint16_t>{1, 2}, std::nullopt};
  Record b{"b\xc3\xa9", {}, std::nullopt, std::vector<float>{0.5f, -1.f}};
  Record c{"c", {1.f, 1.f, 1.f}, std::vector<std::uint16_t>{7}, std::vector<float>{}};
  return {a, b, c};
}

TEST(Container, RoundTrip) {
  auto recs = sample_records();
  auto bytes = encode(recs);
  EXPECT_EQ(decode(bytes), recs);
  EXPECT_EQ(encode(decode(bytes)), bytes);
}

TEST(Container, EmptyListIsValid) {
  auto bytes = encode({});
  EXPECT_EQ(bytes.size(), 12u);
  EXPECT_TRUE(decode(bytes).empty());
}

TEST(Container, HeaderLayout) {
  auto bytes = encode(sample_records());
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MPC1");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 3);
  EXPECT_EQ(bytes[12], 1);  // id length of "a"
}

std::uint64_t error_offset(const std::vector<std::uint8_t>& bytes) {
  try {
    decode(bytes);
  } catch (const FormatError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "expected a FormatError";
  return ~0ULL;
}

TEST(Container, CorruptionsNameTheirOffset) {
  const auto good = encode(sample_records());
  auto bad_magic = good;
  bad_magic[1] = 'X';
  EXPECT_EQ(error_offset(bad_magic), 0u);
  auto bad_version = good;
  bad_version[4] = 2;
  EXPECT_EQ(error_offset(bad_version), 4u);
  auto bad_count = good;
  bad_count[11] = 0x7f;
  EXPECT_EQ(error_offset(bad_count), 8u);
  auto truncated = good;
  truncated.resize(60);
  EXPECT_EQ(error_offset(truncated), 58u);  // point count of record "b"
  auto short_count = good;
  short_count.resize(20);
  EXPECT_EQ(error_offset(short_count), 8u);
  auto bad_flag = good;
  bad_flag[12 + 4 + 1 + 4 + 24] = 9;  // has_labels of record "a"
  EXPECT_EQ(error_offset(bad_flag), 45u);
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(error_offset(trailing), good.size());
}

TEST(Container, ShapeAndPartialFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "mpc_container_test";
  std::filesystem::create_directories(dir);
  std::vector<data::ShapeRecord> shapes{data::generate_shape("box-lid", 1), data::generate_shape("table", 2)};
  write_dataset(dir / "c.mpc", shapes);
  EXPECT_EQ(read_dataset(dir / "c.mpc"), shapes);

  std::vector<data::PartialRecord> partials{data::partialize_parts(shapes[0], 4),
                                            data::partialize_view(shapes[1], {0, 0, 1}, 5)};
  write_partials(dir / "p.mpc", partials);
  EXPECT_EQ(read_partials(dir / "p.mpc"), partials);
  std::filesystem::remove(sidecar_path(dir / "p.mpc"));
  EXPECT_THROW(read_partials(dir / "p.mpc"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace mpc::container
