#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>

#include "semcom/optimizer.hpp"

namespace semcom {

// Flat binary container of named real arrays: a plain-text header
// (name, shape, offset in doubles) followed by the raw payload.
// Round-trips bit-exactly.
inline void save_params(const ParameterSet& params, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_params: cannot open " + path);
  std::ostringstream head;
  head << "SEMCOM-PARAMS 1\n" << params.size() << "\n";
  std::size_t offset = 0;
  for (const auto& [name, t] : params.items()) {
    head << name << " " << t.shape().size();
    for (auto d : t.shape()) head << " " << d;
    head << " " << offset << "\n";
    offset += t.numel();
  }
  head << "DATA\n";
  f << head.str();
  for (const auto& [name, t] : params.items())
    f.write(reinterpret_cast<const char*>(t.values().data()),
            static_cast<std::streamsize>(t.numel() * sizeof(double)));
  if (!f) throw std::runtime_error("save_params: write failed for " + path);
}

inline ParameterSet load_params(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_params: cannot open " + path);
  std::string magic;
  int version = 0;
  f >> magic >> version;
  if (magic != "SEMCOM-PARAMS" || version != 1)
    throw std::runtime_error("load_params: " + path + " is not a parameter container");
  std::size_t count = 0;
  f >> count;
  struct Entry {
    std::string name;
    Shape shape;
    std::size_t offset;
  };
  std::vector<Entry> entries(count);
  for (auto& e : entries) {
    std::size_t ndims = 0;
    f >> e.name >> ndims;
    e.shape.resize(ndims);
    for (auto& d : e.shape) f >> d;
    f >> e.offset;
  }
  std::string data_tag;
  f >> data_tag;
  if (data_tag != "DATA") throw std::runtime_error("load_params: malformed header in " + path);
  f.get();  // newline before payload

  const std::streampos payload = f.tellg();
  ParameterSet params;
  for (const auto& e : entries) {
    std::vector<double> v(shape_numel(e.shape));
    f.seekg(payload + static_cast<std::streamoff>(e.offset * sizeof(double)));
    f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!f) throw std::runtime_error("load_params: truncated payload in " + path);
    params.add(e.name, Tensor::from(e.shape, std::move(v)));
  }
  return params;
}

}  // namespace semcom
