// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#include "readapt/checkpoint_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "readapt/errors.hpp"
#include "readapt/parallel.hpp"

namespace readapt {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::string_view kIndexSuffix = ".index.json";
constexpr std::string_view kDefaultBase = "model";

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

std::vector<std::byte> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> buf(static_cast<size_t>(size));
  if (size > 0 &&
      !in.read(reinterpret_cast<char*>(buf.data()), size)) {
    throw IoError("short read on " + path.string());
  }
  return buf;
}

void write_file(const fs::path& path, const std::string& header,
                const std::vector<std::span<const std::byte>>& payloads) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::uint64_t n = header.size();
  std::byte len_le[8];
  for (int i = 0; i < 8; ++i) {
    len_le[i] = static_cast<std::byte>((n >> (8 * i)) & 0xFF);
  }
  out.write(reinterpret_cast<const char*>(len_le), 8);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& p : payloads) {
    out.write(reinterpret_cast<const char*>(p.data()),
              static_cast<std::streamsize>(p.size()));
  }
  if (!out) throw IoError("write failed on " + path.string());
}

// Serializes a set of tensors (given as indices into ckpt.tensors(), already
// name-ordered) into one container file.
void write_container(const Checkpoint& ckpt, const std::vector<size_t>& which,
                     const fs::path& path) {
  json header = json::object();
  if (!ckpt.metadata().empty()) {
    header["__metadata__"] = ckpt.metadata();
  }
  std::uint64_t offset = 0;
  std::vector<std::span<const std::byte>> payloads;
  payloads.reserve(which.size());
  for (size_t idx : which) {
    const NamedTensor& t = ckpt.tensors()[idx];
    const std::uint64_t nbytes = t.byte_size();
    header[t.name()] = {{"dtype", dtype_name(t.dtype())},
                        {"shape", t.shape()},
                        {"data_offsets", {offset, offset + nbytes}}};
    payloads.push_back(t.bytes());
    offset += nbytes;
  }
  write_file(path, header.dump(), payloads);
}

Checkpoint parse_container(const std::vector<std::byte>& buf,
                           const std::string& origin) {
  if (buf.size() < 8) {
    throw FormatError(origin + ": file too small for container header");
  }
  std::uint64_t header_len = 0;
  for (int i = 7; i >= 0; --i) {
    header_len = (header_len << 8) | std::to_integer<std::uint64_t>(buf[i]);
  }
  if (header_len > buf.size() - 8) {
    throw FormatError(origin + ": declared header length " +
                      std::to_string(header_len) + " exceeds file size");
  }
  json header;
  try {
    header = json::parse(buf.begin() + 8, buf.begin() + 8 + header_len);
  } catch (const json::exception& e) {
    throw FormatError(origin + ": malformed container header: " + e.what());
  }
  if (!header.is_object()) {
    throw FormatError(origin + ": container header is not a JSON object");
  }

  const std::byte* data = buf.data() + 8 + header_len;
  const std::uint64_t data_size = buf.size() - 8 - header_len;

  Checkpoint ckpt;
  for (const auto& [name, entry] : header.items()) {
    if (name == "__metadata__") {
      if (!entry.is_object()) {
        throw FormatError(origin + ": __metadata__ is not an object");
      }
      for (const auto& [k, v] : entry.items()) {
        if (!v.is_string()) {
          throw FormatError(origin + ": __metadata__ value for '" + k +
                            "' is not a string");
        }
        ckpt.metadata()[k] = v.get<std::string>();
      }
      continue;
    }
    if (!entry.is_object() || !entry.contains("dtype") ||
        !entry.contains("shape") || !entry.contains("data_offsets")) {
      throw FormatError(origin + ": tensor entry '" + name +
                        "' is missing dtype/shape/data_offsets");
    }
    const std::string dtype_str = entry["dtype"].get<std::string>();
    const std::optional<DType> dtype = dtype_from_name(dtype_str);
    if (!dtype) {
      throw FormatError(origin + ": unsupported dtype \"" + dtype_str +
                        "\" for tensor '" + name + "'");
    }
    std::vector<std::int64_t> shape;
    for (const auto& d : entry["shape"]) {
      shape.push_back(d.get<std::int64_t>());
    }
    const auto& offs = entry["data_offsets"];
    if (!offs.is_array() || offs.size() != 2) {
      throw FormatError(origin + ": bad data_offsets for '" + name + "'");
    }
    const std::uint64_t begin = offs[0].get<std::uint64_t>();
    const std::uint64_t end = offs[1].get<std::uint64_t>();
    std::uint64_t expect = dtype_size(*dtype);
    for (std::int64_t d : shape) {
      if (d <= 0) {
        throw FormatError(origin + ": non-positive dimension in '" + name +
                          "'");
      }
      expect *= static_cast<std::uint64_t>(d);
    }
    if (end < begin || end > data_size || end - begin != expect) {
      throw FormatError(origin + ": data_offsets [" + std::to_string(begin) +
                        "," + std::to_string(end) + ") for '" + name +
                        "' are inconsistent with shape/dtype or file size");
    }
    std::vector<std::byte> payload(data + begin, data + end);
    ckpt.add(NamedTensor(name, std::move(shape), *dtype, std::move(payload)));
  }
  return ckpt;
}

Checkpoint load_container(const fs::path& path) {
  return parse_container(read_file(path), path.string());
}

Checkpoint load_sharded(const fs::path& index_path) {
  json index;
  try {
    std::ifstream in(index_path);
    if (!in) throw IoError("cannot open " + index_path.string());
    index = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(index_path.string() + ": malformed index: " + e.what());
  }
  if (!index.is_object() || !index.contains("weight_map") ||
      !index["weight_map"].is_object()) {
    throw FormatError(index_path.string() + ": index has no weight_map");
  }

  // tensor name -> shard file, plus the distinct shard list.
  std::map<std::string, std::string> weight_map;
  std::vector<std::string> shard_files;
  for (const auto& [tensor, shard] : index["weight_map"].items()) {
    weight_map[tensor] = shard.get<std::string>();
  }
  for (const auto& [tensor, shard] : weight_map) {
    if (std::find(shard_files.begin(), shard_files.end(), shard) ==
        shard_files.end()) {
      shard_files.push_back(shard);
    }
  }
  const fs::path dir = index_path.parent_path();
  for (const auto& shard : shard_files) {
    if (!fs::exists(dir / shard)) {
      throw ShardMissing(index_path.string() + ": shard '" + shard +
                         "' referenced by weight_map does not exist");
    }
  }

  // Shards are independent containers; load them in parallel.
  std::vector<Checkpoint> parts(shard_files.size());
  parallel_for(shard_files.size(), 0, [&](size_t i) {
    parts[i] = load_container(dir / shard_files[i]);
  });

  Checkpoint ckpt;
  for (size_t i = 0; i < parts.size(); ++i) {
    for (const auto& t : parts[i].tensors()) {
      auto it = weight_map.find(t.name());
      if (it == weight_map.end()) {
        throw FormatError(index_path.string() + ": shard '" + shard_files[i] +
                          "' contains tensor '" + t.name() +
                          "' absent from weight_map");
      }
      if (it->second != shard_files[i]) {
        throw FormatError(index_path.string() + ": tensor '" + t.name() +
                          "' found in shard '" + shard_files[i] +
                          "' but mapped to '" + it->second + "'");
      }
      if (ckpt.has(t.name())) {
        throw FormatError(index_path.string() + ": tensor '" + t.name() +
                          "' appears in more than one shard");
      }
      ckpt.add(t);
    }
    for (const auto& [k, v] : parts[i].metadata()) ckpt.metadata()[k] = v;
  }
  for (const auto& [tensor, shard] : weight_map) {
    if (!ckpt.has(tensor)) {
      throw FormatError(index_path.string() + ": weight_map names tensor '" +
                        tensor + "' that no shard provides");
    }
  }
  if (index.contains("metadata") && index["metadata"].contains("total_size")) {
    const std::uint64_t declared =
        index["metadata"]["total_size"].get<std::uint64_t>();
    if (declared != ckpt.total_bytes()) {
      throw FormatError(index_path.string() + ": total_size " +
                        std::to_string(declared) + " does not match loaded " +
                        std::to_string(ckpt.total_bytes()) + " bytes");
    }
  }
  return ckpt;
}

std::string shard_name(size_t i, size_t n) {
  std::ostringstream os;
  os << kDefaultBase << '-';
  os.width(5);
  os.fill('0');
  os << (i + 1);
  os << "-of-";
  os.width(5);
  os.fill('0');
  os << n;
  os << ".safetensors";
  return os.str();
}

void save_sharded(const Checkpoint& ckpt, const fs::path& dir,
                  std::uint64_t max_shard_bytes) {
  // Greedy first-fit in name order; a tensor never spans two shards.
  std::vector<std::vector<size_t>> shards;
  std::uint64_t current = 0;
  for (size_t i = 0; i < ckpt.tensors().size(); ++i) {
    const std::uint64_t nbytes = ckpt.tensors()[i].byte_size();
    if (nbytes > max_shard_bytes) {
      throw ShardTooSmall("tensor '" + ckpt.tensors()[i].name() + "' (" +
                          std::to_string(nbytes) +
                          " bytes) exceeds max_shard_bytes=" +
                          std::to_string(max_shard_bytes));
    }
    if (shards.empty() || current + nbytes > max_shard_bytes) {
      shards.emplace_back();
      current = 0;
    }
    shards.back().push_back(i);
    current += nbytes;
  }
  if (shards.empty()) shards.emplace_back();  // empty checkpoint, one shard

  std::error_code ec;
  fs::create_directories(dir, ec);
  json weight_map = json::object();
  for (size_t s = 0; s < shards.size(); ++s) {
    const std::string fname = shard_name(s, shards.size());
    write_container(ckpt, shards[s], dir / fname);
    for (size_t idx : shards[s]) {
      weight_map[ckpt.tensors()[idx].name()] = fname;
    }
  }
  json index = {{"metadata", {{"total_size", ckpt.total_bytes()}}},
                {"weight_map", weight_map}};
  std::ofstream out(dir / (std::string(kDefaultBase) + ".safetensors" +
                           std::string(kIndexSuffix)));
  if (!out) throw IoError("cannot write index in " + dir.string());
  out << index.dump(2) << '\n';
  if (!out) throw IoError("write failed on index in " + dir.string());
}

}  // namespace

std::string AlignmentReport::summary() const {
  std::ostringstream os;
  os << matched.size() << " matched, " << missing_in_a.size()
     << " missing in first, " << missing_in_b.size() << " missing in second, "
     << shape_mismatches.size() << " shape mismatch(es)";
  for (const auto& m : shape_mismatches) {
    os << "\n  shape mismatch: " << m.name << " [";
    for (size_t i = 0; i < m.shape_a.size(); ++i) {
      os << (i ? "," : "") << m.shape_a[i];
    }
    os << "] vs [";
    for (size_t i = 0; i < m.shape_b.size(); ++i) {
      os << (i ? "," : "") << m.shape_b[i];
    }
    os << "]";
  }
  for (const auto& n : missing_in_a) os << "\n  only in second: " << n;
  for (const auto& n : missing_in_b) os << "\n  only in first: " << n;
  return os.str();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (fs::is_directory(path)) {
    const fs::path index = path / (std::string(kDefaultBase) +
                                   ".safetensors" + std::string(kIndexSuffix));
    if (fs::exists(index)) return load_sharded(index);
    const fs::path single =
        path / (std::string(kDefaultBase) + ".safetensors");
    if (fs::exists(single)) return load_container(single);
    throw IoError("no checkpoint found in directory " + path.string());
  }
  if (!fs::exists(path)) {
    throw IoError("checkpoint path does not exist: " + path.string());
  }
  if (ends_with(path.string(), kIndexSuffix)) return load_sharded(path);
  return load_container(path);
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path,
                     std::optional<std::uint64_t> max_shard_bytes) {
  if (max_shard_bytes) {
    save_sharded(ckpt, path, *max_shard_bytes);
    return;
  }
  if (!path.parent_path().empty()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::vector<size_t> all(ckpt.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  write_container(ckpt, all, path);
}

AlignmentReport validate_pair(const Checkpoint& a, const Checkpoint& b) {
  AlignmentReport report;
  for (const auto& ta : a.tensors()) {
    if (!b.has(ta.name())) {
      report.missing_in_b.push_back(ta.name());
      continue;
    }
    const NamedTensor& tb = b.get(ta.name());
    if (ta.shape() == tb.shape()) {
      report.matched.push_back(ta.name());
    } else {
      report.shape_mismatches.push_back({ta.name(), ta.shape(), tb.shape()});
    }
  }
  for (const auto& tb : b.tensors()) {
    if (!a.has(tb.name())) report.missing_in_a.push_back(tb.name());
  }
  return report;
}

}  // namespace readapt
