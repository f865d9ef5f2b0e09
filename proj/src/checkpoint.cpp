// src/checkpoint.cpp
#include "sfs/checkpoint.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace sfs::ckpt {

namespace {

void write_string(std::ostream& out, const std::string& s) {
  const uint64_t len = s.size();
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(s.data(), static_cast<std::streamsize>(len));
}

std::string read_string(std::istream& in, const char* what) {
  uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 8);
  if (!in || len > (1ull << 32)) throw CorruptCheckpoint(std::string("bad ") + what);
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw CorruptCheckpoint(std::string("truncated ") + what);
  return s;
}

}  // namespace

void save(const std::string& path, const std::string& kind,
          const std::string& meta_json,
          const std::map<std::string, ad::Var>& params,
          const std::function<void(std::ostream&)>& extra) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IOError("cannot write " + tmp);
    out.write("SFCK", 4);
    out.write(reinterpret_cast<const char*>(&kVersion), 4);
    write_string(out, kind);
    write_string(out, meta_json);

    const uint64_t n = params.size();
    out.write(reinterpret_cast<const char*>(&n), 8);
    for (const auto& [name, p] : params) {
      write_string(out, name);
      const uint32_t ndim = static_cast<uint32_t>(p.val().shape.size());
      out.write(reinterpret_cast<const char*>(&ndim), 4);
      for (int64_t d : p.val().shape)
        out.write(reinterpret_cast<const char*>(&d), 8);
      out.write(reinterpret_cast<const char*>(p.val().ptr()),
                static_cast<std::streamsize>(8 * p.val().numel()));
    }
    const uint8_t has_extra = extra ? 1 : 0;
    out.write(reinterpret_cast<const char*>(&has_extra), 1);
    if (extra) extra(out);
    out.write("SFED", 4);
    if (!out) throw IOError(path + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string open_and_check(std::ifstream& in, const std::string& path,
                           const std::string& expected_kind) {
  if (!in) throw IOError("cannot read " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "SFCK")
    throw CorruptCheckpoint(path + ": bad magic");
  uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  if (version != kVersion)
    throw VersionMismatch(path + ": file version " + std::to_string(version) +
                          ", this build reads version " + std::to_string(kVersion));
  const std::string kind = read_string(in, "kind");
  if (!expected_kind.empty() && kind != expected_kind)
    throw CorruptCheckpoint(path + ": kind '" + kind + "', expected '" +
                            expected_kind + "'");
  return read_string(in, "meta");
}

}  // namespace

std::string load(const std::string& path, const std::string& expected_kind,
                 std::map<std::string, ad::Var> params,
                 const std::function<void(std::istream&)>& extra) {
  std::ifstream in(path, std::ios::binary);
  const std::string meta = open_and_check(in, path, expected_kind);

  uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  if (!in) throw CorruptCheckpoint(path + ": truncated tensor count");
  for (uint64_t i = 0; i < n; ++i) {
    const std::string name = read_string(in, "tensor name");
    uint32_t ndim = 0;
    in.read(reinterpret_cast<char*>(&ndim), 4);
    if (!in || ndim > 8) throw CorruptCheckpoint(path + ": bad tensor rank");
    std::vector<int64_t> shape(ndim);
    for (uint32_t d = 0; d < ndim; ++d)
      in.read(reinterpret_cast<char*>(&shape[d]), 8);
    auto it = params.find(name);
    if (it == params.end())
      throw CorruptCheckpoint(path + ": unexpected tensor '" + name + "'");
    if (it->second.val().shape != shape)
      throw CorruptCheckpoint(path + ": shape mismatch for '" + name + "'");
    in.read(reinterpret_cast<char*>(it->second.val().ptr()),
            static_cast<std::streamsize>(8 * it->second.val().numel()));
    if (!in) throw CorruptCheckpoint(path + ": truncated tensor '" + name + "'");
    params.erase(it);
  }
  if (!params.empty())
    throw CorruptCheckpoint(path + ": missing tensor '" +
                            params.begin()->first + "'");
  uint8_t has_extra = 0;
  in.read(reinterpret_cast<char*>(&has_extra), 1);
  if (!in) throw CorruptCheckpoint(path + ": truncated");
  if (has_extra) {
    if (!extra) throw CorruptCheckpoint(path + ": unexpected extra section");
    extra(in);
  }
  char tail[4];
  in.read(tail, 4);
  if (!in || std::string(tail, 4) != "SFED")
    throw CorruptCheckpoint(path + ": missing end marker");
  return meta;
}

std::string peek_meta(const std::string& path, const std::string& expected_kind) {
  std::ifstream in(path, std::ios::binary);
  return open_and_check(in, path, expected_kind);
}

}  // namespace sfs::ckpt
