#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dal/nn/core.hpp"

namespace dal::nn {

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian");

// Weight-file container: magic "DALW", u32 version, then a named tensor
// table; each entry is name, rank, dims, raw float32 data.
struct TensorFile {
  struct Entry {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;
  };
  std::map<std::string, Entry> entries;

  static constexpr std::uint32_t kVersion = 1;

  void put(const std::string& name, std::vector<std::uint32_t> dims,
           std::vector<float> data) {
    entries[name] = Entry{std::move(dims), std::move(data)};
  }

  template <class S>
  void put(const Param<S>& p) {
    Entry e;
    e.dims = {static_cast<std::uint32_t>(p.w.rows()),
              static_cast<std::uint32_t>(p.w.cols())};
    e.data.resize(static_cast<size_t>(p.w.size()));
    for (Eigen::Index i = 0; i < p.w.size(); ++i)
      e.data[static_cast<size_t>(i)] = static_cast<float>(p.w.data()[i]);
    entries[p.name] = std::move(e);
  }

  template <class S>
  void get(Param<S>& p) const {
    auto it = entries.find(p.name);
    if (it == entries.end())
      throw std::runtime_error("weight file: missing tensor " + p.name);
    const Entry& e = it->second;
    if (e.dims.size() != 2 ||
        e.dims[0] != static_cast<std::uint32_t>(p.w.rows()) ||
        e.dims[1] != static_cast<std::uint32_t>(p.w.cols()))
      throw std::runtime_error("weight file: shape mismatch for " + p.name);
    for (Eigen::Index i = 0; i < p.w.size(); ++i)
      p.w.data()[i] = static_cast<S>(e.data[static_cast<size_t>(i)]);
  }

  void write(std::ostream& os) const {
    os.write("DALW", 4);
    write_u32(os, kVersion);
    write_u32(os, static_cast<std::uint32_t>(entries.size()));
    for (const auto& [name, e] : entries) {
      write_u32(os, static_cast<std::uint32_t>(name.size()));
      os.write(name.data(), static_cast<std::streamsize>(name.size()));
      write_u32(os, static_cast<std::uint32_t>(e.dims.size()));
      for (std::uint32_t d : e.dims) write_u32(os, d);
      os.write(reinterpret_cast<const char*>(e.data.data()),
               static_cast<std::streamsize>(e.data.size() * sizeof(float)));
    }
  }

  void read(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "DALW", 4) != 0)
      throw std::runtime_error("weight file: bad magic");
    if (read_u32(is) != kVersion)
      throw std::runtime_error("weight file: unsupported version");
    const std::uint32_t n = read_u32(is);
    entries.clear();
    for (std::uint32_t i = 0; i < n; ++i) {
      std::string name(read_u32(is), '\0');
      is.read(name.data(), static_cast<std::streamsize>(name.size()));
      Entry e;
      e.dims.resize(read_u32(is));
      std::uint64_t count = 1;
      for (std::uint32_t& d : e.dims) {
        d = read_u32(is);
        count *= d;
      }
      e.data.resize(count);
      is.read(reinterpret_cast<char*>(e.data.data()),
              static_cast<std::streamsize>(count * sizeof(float)));
      if (!is) throw std::runtime_error("weight file: truncated");
      entries[name] = std::move(e);
    }
  }

 private:
  static void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
  }
  static std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
  }
};

}  // namespace dal::nn
