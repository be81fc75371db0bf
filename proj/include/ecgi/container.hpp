#pragma once

// Named-tensor container ("NTC1"): the on-disk interchange format for
// weights, lead fields, TMP/ECG sequences and reconstructions.
//
// Layout:
//   bytes 0..3   magic "NTC1"
//   bytes 4..11  uint64 little-endian byte length of the JSON header
//   header       UTF-8 JSON: {"version":1, "endianness":"little",
//                "order":"column-major", "tensors":[{"name","shape","dtype"}...],
//                "metadata":{...}}
//   payloads     raw little-endian IEEE-754 values, one block per tensor in
//                header order; rank-2 tensors are stored column-major.
//
// Round trips are bit-exact at the declared dtype ("f64" or "f32").

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "ecgi/common.hpp"

namespace ecgi {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;  // column-major for rank 2

  std::size_t size() const {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
  }

  static Tensor from_matrix(const Eigen::MatrixXd& m) {
    Tensor t;
    t.shape = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
    t.data.assign(m.data(), m.data() + m.size());
    return t;
  }

  static Tensor from_vector(const Eigen::VectorXd& v) {
    Tensor t;
    t.shape = {static_cast<std::size_t>(v.size())};
    t.data.assign(v.data(), v.data() + v.size());
    return t;
  }

  Eigen::MatrixXd to_matrix() const {
    if (shape.size() == 1)
      return Eigen::Map<const Eigen::MatrixXd>(data.data(), static_cast<Eigen::Index>(shape[0]), 1);
    if (shape.size() != 2) throw FormatError("tensor is not rank 1 or 2");
    return Eigen::Map<const Eigen::MatrixXd>(data.data(), static_cast<Eigen::Index>(shape[0]),
                                             static_cast<Eigen::Index>(shape[1]));
  }

  Eigen::VectorXd to_vector() const {
    if (size() != data.size()) throw FormatError("tensor shape/data mismatch");
    return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
  }
};

class NamedTensorContainer {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
    std::string dtype = "f64";
  };

  void add(std::string name, Tensor tensor, std::string dtype = "f64") {
    if (contains(name)) throw FormatError("duplicate tensor name: " + name);
    if (dtype != "f64" && dtype != "f32") throw FormatError("unsupported dtype: " + dtype);
    if (tensor.size() != tensor.data.size()) throw FormatError("tensor shape/data mismatch: " + name);
    entries_.push_back({std::move(name), std::move(tensor), std::move(dtype)});
  }

  void add_matrix(const std::string& name, const Eigen::MatrixXd& m) { add(name, Tensor::from_matrix(m)); }
  void add_vector(const std::string& name, const Eigen::VectorXd& v) { add(name, Tensor::from_vector(v)); }

  bool contains(const std::string& name) const {
    for (const auto& e : entries_)
      if (e.name == name) return true;
    return false;
  }

  const Tensor& at(const std::string& name) const {
    for (const auto& e : entries_)
      if (e.name == name) return e.tensor;
    throw FormatError("missing tensor: " + name);
  }

  const std::vector<Entry>& entries() const { return entries_; }

  nlohmann::json metadata = nlohmann::json::object();

 private:
  std::vector<Entry> entries_;
};

namespace detail {

inline void check_little_endian_host() {
  if constexpr (std::endian::native != std::endian::little)
    throw FormatError("NTC1 requires a little-endian host");
}

inline std::size_t dtype_bytes(const std::string& dtype) { return dtype == "f32" ? 4 : 8; }

}  // namespace detail

inline void save_container(const std::filesystem::path& path, const NamedTensorContainer& c) {
  detail::check_little_endian_host();
  nlohmann::json header;
  header["version"] = 1;
  header["endianness"] = "little";
  header["order"] = "column-major";
  header["tensors"] = nlohmann::json::array();
  for (const auto& e : c.entries()) {
    nlohmann::json t;
    t["name"] = e.name;
    t["shape"] = e.tensor.shape;
    t["dtype"] = e.dtype;
    header["tensors"].push_back(t);
  }
  header["metadata"] = c.metadata;
  const std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open for writing: " + path.string());
  out.write("NTC1", 4);
  const std::uint64_t hsize = htext.size();
  out.write(reinterpret_cast<const char*>(&hsize), sizeof(hsize));
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const auto& e : c.entries()) {
    if (e.dtype == "f64") {
      out.write(reinterpret_cast<const char*>(e.tensor.data.data()),
                static_cast<std::streamsize>(e.tensor.data.size() * 8));
    } else {
      std::vector<float> narrow(e.tensor.data.begin(), e.tensor.data.end());
      out.write(reinterpret_cast<const char*>(narrow.data()),
                static_cast<std::streamsize>(narrow.size() * 4));
    }
  }
  if (!out) throw FormatError("write failed: " + path.string());
}

inline NamedTensorContainer load_container(const std::filesystem::path& path) {
  detail::check_little_endian_host();
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw FormatError("cannot open: " + path.string());
  const std::uint64_t fsize = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);
  if (fsize < 12) throw FormatError("truncated container (no header): " + path.string());

  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, "NTC1", 4) != 0) throw FormatError("bad magic: " + path.string());
  std::uint64_t hsize = 0;
  in.read(reinterpret_cast<char*>(&hsize), sizeof(hsize));
  if (12 + hsize > fsize) throw FormatError("truncated header: " + path.string());

  std::string htext(hsize, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hsize));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(htext);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("header parse error: " + std::string(e.what()));
  }
  if (!header.contains("version") || header["version"].get<int>() != 1)
    throw FormatError("unsupported container version");
  if (header.value("endianness", "") != "little")
    throw FormatError("unsupported endianness");

  NamedTensorContainer c;
  c.metadata = header.value("metadata", nlohmann::json::object());

  std::uint64_t payload = 0;
  struct Pending {
    std::string name;
    std::vector<std::size_t> shape;
    std::string dtype;
    std::size_t count;
  };
  std::vector<Pending> pending;
  for (const auto& t : header.value("tensors", nlohmann::json::array())) {
    Pending p;
    p.name = t.at("name").get<std::string>();
    p.shape = t.at("shape").get<std::vector<std::size_t>>();
    p.dtype = t.at("dtype").get<std::string>();
    if (p.dtype != "f64" && p.dtype != "f32") throw FormatError("unsupported dtype: " + p.dtype);
    p.count = 1;
    for (std::size_t d : p.shape) p.count *= d;
    if (p.shape.empty()) p.count = 0;
    payload += p.count * detail::dtype_bytes(p.dtype);
    pending.push_back(std::move(p));
  }
  if (12 + hsize + payload != fsize)
    throw FormatError("payload size mismatch (truncated or trailing bytes): " + path.string());

  for (auto& p : pending) {
    Tensor t;
    t.shape = std::move(p.shape);
    t.data.resize(p.count);
    if (p.dtype == "f64") {
      in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(p.count * 8));
    } else {
      std::vector<float> narrow(p.count);
      in.read(reinterpret_cast<char*>(narrow.data()), static_cast<std::streamsize>(p.count * 4));
      for (std::size_t i = 0; i < p.count; ++i) t.data[i] = narrow[i];
    }
    if (!in) throw FormatError("payload read failed: " + path.string());
    c.add(p.name, std::move(t), p.dtype);
  }
  return c;
}

}  // namespace ecgi
