#include "mpc/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "mpc/error.hpp"

namespace mpc::container {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) u8(static_cast<std::uint8_t>(v >> s));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

  std::uint64_t offset() const { return pos_; }
  std::uint64_t remaining() const { return in_.size() - pos_; }

  void need(std::uint64_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(pos_, std::string("truncated ") + what + " (need " + std::to_string(n) + " bytes, " +
                                  std::to_string(remaining()) + " left)");
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return in_[pos_++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    const auto v = static_cast<std::uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string str(std::uint32_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  const std::vector<std::uint8_t>& in_;
  std::uint64_t pos_ = 0;
};

// Smallest encoded record: empty id, no points, no labels, no factors.
constexpr std::uint64_t kMinRecordBytes = 4 + 4 + 1 + 1;

std::uint32_t checked_u32(std::size_t n, const char* what) {
  if (n > UINT32_MAX) throw SizeError(std::string(what) + " does not fit in u32");
  return static_cast<std::uint32_t>(n);
}

}  // namespace

std::vector<std::uint8_t> encode(const std::vector<Record>& records) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u32(checked_u32(records.size(), "record count"));
  for (const Record& r : records) {
    if (r.xyz.size() % 3 != 0) throw SizeError("record '" + r.id + "': coordinate array not a multiple of 3");
    const std::size_t n = r.point_count();
    w.u32(checked_u32(r.id.size(), "id length"));
    w.bytes(r.id.data(), r.id.size());
    w.u32(checked_u32(n, "point count"));
    for (float v : r.xyz) w.f32(v);
    w.u8(r.labels ? 1 : 0);
    if (r.labels) {
      if (r.labels->size() != n) throw SizeError("record '" + r.id + "': label count does not match point count");
      for (std::uint16_t l : *r.labels) w.u16(l);
    }
    w.u8(r.factors ? 1 : 0);
    if (r.factors) {
      w.u32(checked_u32(r.factors->size(), "factor count"));
      for (float f : *r.factors) w.f32(f);
    }
  }
  return w.take();
}

std::vector<Record> decode(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError(0, "bad magic (expected \"MPC1\")");
  r.str(4, "magic");
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kVersion) throw FormatError(version_at, "unsupported version " + std::to_string(version));
  const std::uint64_t count_at = r.offset();
  const std::uint32_t count = r.u32("record count");
  if (count > r.remaining() / kMinRecordBytes) {
    throw FormatError(count_at, "record count " + std::to_string(count) + " cannot fit in the remaining " +
                                    std::to_string(r.remaining()) + " bytes");
  }
  std::vector<Record> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Record rec;
    const std::uint32_t id_len = r.u32("id length");
    rec.id = r.str(id_len, "id");
    const std::uint64_t n_at = r.offset();
    const std::uint32_t n = r.u32("point count");
    if (std::uint64_t{n} * 12 > r.remaining()) {
      throw FormatError(n_at, "point count " + std::to_string(n) + " exceeds the remaining bytes");
    }
    rec.xyz.resize(std::size_t{n} * 3);
    for (float& v : rec.xyz) v = r.f32("coordinates");
    const std::uint64_t labels_at = r.offset();
    const std::uint8_t has_labels = r.u8("has_labels flag");
    if (has_labels > 1) throw FormatError(labels_at, "has_labels flag must be 0 or 1");
    if (has_labels == 1) {
      std::vector<std::uint16_t> labels(n);
      for (auto& l : labels) l = r.u16("labels");
      rec.labels = std::move(labels);
    }
    const std::uint64_t factors_at = r.offset();
    const std::uint8_t has_factors = r.u8("has_factors flag");
    if (has_factors > 1) throw FormatError(factors_at, "has_factors flag must be 0 or 1");
    if (has_factors == 1) {
      const std::uint64_t f_at = r.offset();
      const std::uint32_t f = r.u32("factor count");
      if (std::uint64_t{f} * 4 > r.remaining()) {
        throw FormatError(f_at, "factor count " + std::to_string(f) + " exceeds the remaining bytes");
      }
      std::vector<float> factors(f);
      for (float& v : factors) v = r.f32("factors");
      rec.factors = std::move(factors);
    }
    out.push_back(std::move(rec));
  }
  if (r.remaining() != 0) throw FormatError(r.offset(), "trailing bytes after the last record");
  return out;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

void write_file(const std::filesystem::path& path, const std::vector<Record>& records) {
  write_bytes(path, encode(records));
}

std::vector<Record> read_file(const std::filesystem::path& path) { return decode(read_bytes(path)); }

std::string bytes_hash(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::string file_hash(const std::filesystem::path& path) { return bytes_hash(read_bytes(path)); }

Record cloud_record(const std::string& id, const geometry::PointCloud& cloud) {
  Record r;
  r.id = id;
  r.xyz = cloud.to_floats();
  return r;
}

geometry::PointCloud cloud_of(const Record& rec) { return geometry::PointCloud::from_floats(rec.xyz); }

Record to_record(const data::ShapeRecord& shape) {
  Record r = cloud_record(shape.id, shape.complete);
  r.labels = shape.part_labels;
  std::vector<float> f;
  for (double v : shape.latent_factors) f.push_back(static_cast<float>(v));
  r.factors = std::move(f);
  return r;
}

data::ShapeRecord to_shape(const Record& rec) {
  data::ShapeRecord s;
  s.id = rec.id;
  s.complete = cloud_of(rec);
  if (rec.labels) s.part_labels = *rec.labels;
  s.family = data::family_of(rec.id);
  if (rec.factors) {
    for (float v : *rec.factors) s.latent_factors.push_back(v);
  }
  return s;
}

void write_dataset(const std::filesystem::path& path, const std::vector<data::ShapeRecord>& shapes) {
  std::vector<Record> recs;
  recs.reserve(shapes.size());
  for (const auto& s : shapes) recs.push_back(to_record(s));
  write_file(path, recs);
}

std::vector<data::ShapeRecord> read_dataset(const std::filesystem::path& path) {
  std::vector<data::ShapeRecord> out;
  for (const Record& r : read_file(path)) out.push_back(to_shape(r));
  return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".meta.json");
}

void write_partials(const std::filesystem::path& path, const std::vector<data::PartialRecord>& partials) {
  std::vector<Record> recs;
  nlohmann::json meta;
  meta["format"] = "mpc-partials";
  meta["records"] = nlohmann::json::array();
  for (const auto& p : partials) {
    recs.push_back(cloud_record(p.id, p.partial));
    meta["records"].push_back({{"id", p.id},
                               {"source_id", p.source_id},
                               {"method", data::to_string(p.method)},
                               {"params", p.method_params}});
  }
  write_file(path, recs);
  std::ofstream out(sidecar_path(path), std::ios::trunc);
  if (!out) throw IoError("cannot write " + sidecar_path(path).string());
  out << meta.dump(2) << '\n';
}

std::vector<data::PartialRecord> read_partials(const std::filesystem::path& path) {
  const auto recs = read_file(path);
  std::ifstream in(sidecar_path(path));
  if (!in) throw IoError("missing sidecar " + sidecar_path(path).string());
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed sidecar " + sidecar_path(path).string() + ": " + e.what());
  }
  const auto& entries = meta.at("records");
  if (entries.size() != recs.size()) {
    throw IoError("sidecar " + sidecar_path(path).string() + " lists " + std::to_string(entries.size()) +
                  " records, container has " + std::to_string(recs.size()));
  }
  std::vector<data::PartialRecord> out;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& m = entries[i];
    if (m.at("id").get<std::string>() != recs[i].id) {
      throw IoError("sidecar record " + std::to_string(i) + " id does not match container");
    }
    data::PartialRecord p;
    p.id = recs[i].id;
    p.source_id = m.at("source_id").get<std::string>();
    p.partial = cloud_of(recs[i]);
    p.method = data::partial_method_from_string(m.at("method").get<std::string>());
    p.method_params = m.at("params").get<std::map<std::string, std::string>>();
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace mpc::container
