#include "gcr/feature_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <string_view>

namespace gcr {

namespace {

constexpr char kMagic[4] = {'G', 'C', 'R', 'F'};
constexpr std::uint32_t kVersion = 1;

void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::string_view trim_cr(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

std::int64_t parse_int(std::string_view field, const char* what) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw MalformedHeader(std::string("manifest: bad ") + what + " field '" +
                          std::string(field) + "'");
  return value;
}

std::vector<SampleMeta> load_manifest(const std::filesystem::path& path,
                                      std::size_t n) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open manifest " + path.string());

  std::string line;
  if (!std::getline(in, line) ||
      trim_cr(line) != "index,identity,camera,tracklet,split")
    throw MalformedHeader("manifest: missing or bad header row in " +
                          path.string());

  std::vector<SampleMeta> meta(n);
  std::vector<char> seen(n, 0);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::string_view sv = trim_cr(line);
    if (sv.empty()) continue;
    std::array<std::string_view, 5> fields;
    std::size_t start = 0, nfields = 0;
    for (std::size_t pos = 0; pos <= sv.size(); ++pos) {
      if (pos == sv.size() || sv[pos] == ',') {
        if (nfields >= 5) throw MalformedHeader("manifest: too many fields");
        fields[nfields++] = sv.substr(start, pos - start);
        start = pos + 1;
      }
    }
    if (nfields != 5) throw MalformedHeader("manifest: expected 5 fields");

    const std::int64_t index = parse_int(fields[0], "index");
    ++rows;
    if (rows > n) break;  // counted below as a mismatch
    if (index < 0 || static_cast<std::size_t>(index) >= n)
      throw ValidationError("manifest: index " + std::to_string(index) +
                            " out of range for n=" + std::to_string(n));
    if (seen[index])
      throw ValidationError("manifest: duplicate index " + std::to_string(index));
    seen[index] = 1;

    SampleMeta& m = meta[index];
    m.identity = parse_int(fields[1], "identity");
    const std::int64_t cam = parse_int(fields[2], "camera");
    if (cam < 0) throw ValidationError("manifest: camera id must be >= 0");
    m.camera = static_cast<std::int32_t>(cam);
    m.tracklet = parse_int(fields[3], "tracklet");
    if (fields[4] == "query")
      m.split = Split::Query;
    else if (fields[4] == "gallery")
      m.split = Split::Gallery;
    else
      throw MalformedHeader("manifest: split must be 'query' or 'gallery'");
  }
  if (rows != n)
    throw DimensionMismatch("manifest rows (" + std::to_string(rows) +
                            ") != n (" + std::to_string(n) + ")");
  return meta;
}

void save_manifest(const FeatureSet& fs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure("cannot open manifest for writing: " + path.string());
  out << "index,identity,camera,tracklet,split\n";
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const SampleMeta& m = fs.meta()[i];
    out << i << ',' << m.identity << ',' << m.camera << ',' << m.tracklet << ','
        << (m.split == Split::Query ? "query" : "gallery") << '\n';
  }
  out.flush();
  if (!out) throw IoFailure("failed writing manifest " + path.string());
}

}  // namespace

void FeatureSet::validate() const {
  if (n_ < 1 || d_ < 1) throw ValidationError("feature set must have n>=1, d>=1");
  if (data_.size() != n_ * d_)
    throw ValidationError("data size does not match n*d");
  if (meta_.size() != n_)
    throw ValidationError("meta length does not match n");
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t t = 0; t < d_; ++t)
      if (!std::isfinite(data_[i * d_ + t])) throw NonFiniteValue(i, t);
  for (const auto& m : meta_)
    if (m.camera < 0) throw ValidationError("camera id must be >= 0");
  // A tracklet never spans identities or cameras.
  struct Owner { std::int64_t identity; std::int32_t camera; };
  std::map<std::int64_t, Owner> owners;
  for (const auto& m : meta_) {
    if (m.tracklet < 0) continue;
    auto [it, inserted] = owners.try_emplace(m.tracklet, Owner{m.identity, m.camera});
    if (!inserted && (it->second.identity != m.identity || it->second.camera != m.camera))
      throw ValidationError("tracklet " + std::to_string(m.tracklet) +
                            " spans multiple identities or cameras");
  }
  if (normalized_) {
    for (std::size_t i = 0; i < n_; ++i) {
      double norm_sq = 0.0;
      for (std::size_t t = 0; t < d_; ++t) {
        const double v = data_[i * d_ + t];
        norm_sq += v * v;
      }
      const double norm = std::sqrt(norm_sq);
      if (norm != 0.0 && std::abs(norm - 1.0) > 1e-4)
        throw ValidationError("normalized flag set but row " + std::to_string(i) +
                              " has norm " + std::to_string(norm));
    }
  }
}

std::size_t count_zero_rows(const FeatureSet& fs) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    bool all_zero = true;
    for (float v : fs.row(i))
      if (v != 0.0f) { all_zero = false; break; }
    if (all_zero) ++count;
  }
  return count;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& features) {
  std::filesystem::path p = features;
  p.replace_extension();
  p += ".manifest.csv";
  return p;
}

FeatureSet load_features(const std::filesystem::path& path) {
  return load_features(path, manifest_path_for(path));
}

FeatureSet load_features(const std::filesystem::path& path,
                         const std::filesystem::path& manifest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());

  unsigned char header[24];
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header)))
    throw MalformedHeader("file too short for GCRF header: " + path.string());
  if (std::memcmp(header, kMagic, 4) != 0)
    throw MalformedHeader("bad magic bytes in " + path.string());
  if (get_u32le(header + 4) != kVersion)
    throw MalformedHeader("unsupported GCRF version in " + path.string());
  const std::uint64_t n = get_u64le(header + 8);
  const std::uint64_t d = get_u64le(header + 16);
  if (n < 1 || d < 1) throw MalformedHeader("GCRF header requires n>=1, d>=1");

  const std::uintmax_t actual = std::filesystem::file_size(path);
  const std::uintmax_t expected = sizeof(header) + n * d * 4;
  if (actual != expected)
    throw MalformedHeader("payload length mismatch: expected " +
                          std::to_string(expected) + " bytes, file has " +
                          std::to_string(actual));

  FeatureSet fs(n, d);
  std::vector<unsigned char> raw(n * d * 4);
  if (!in.read(reinterpret_cast<char*>(raw.data()), raw.size()))
    throw IoFailure("failed reading payload of " + path.string());
  for (std::size_t i = 0; i < n * d; ++i)
    fs.data()[i] = std::bit_cast<float>(get_u32le(raw.data() + i * 4));

  for (std::size_t i = 0; i < n * d; ++i)
    if (!std::isfinite(fs.data()[i])) throw NonFiniteValue(i / d, i % d);

  fs.meta() = load_manifest(manifest, n);
  fs.validate();
  return fs;
}

void save_features(const FeatureSet& fs, const std::filesystem::path& path) {
  save_features(fs, path, manifest_path_for(path));
}

void save_features(const FeatureSet& fs, const std::filesystem::path& path,
                   const std::filesystem::path& manifest) {
  std::string blob;
  blob.reserve(24 + fs.data().size() * 4);
  blob.append(kMagic, 4);
  put_u32le(blob, kVersion);
  put_u64le(blob, fs.size());
  put_u64le(blob, fs.dim());
  for (float v : fs.data()) put_u32le(blob, std::bit_cast<std::uint32_t>(v));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open for writing: " + path.string());
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  out.flush();
  if (!out) throw IoFailure("failed writing " + path.string());

  save_manifest(fs, manifest);
}

FeatureSet normalize_rows(const FeatureSet& fs) {
  FeatureSet out = fs;
  const std::size_t d = fs.dim();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    double norm_sq = 0.0;
    for (float v : fs.row(i)) norm_sq += static_cast<double>(v) * v;
    const double denom = std::max(std::sqrt(norm_sq), 1e-12);
    auto row = out.row(i);
    for (std::size_t t = 0; t < d; ++t)
      row[t] = static_cast<float>(static_cast<double>(fs.row(i)[t]) / denom);
  }
  out.set_normalized(true);
  return out;
}

}  // namespace gcr
