// sfs/checkpoint.h -- versioned named-tensor container.
//
// Layout: "SFCK" | u32 version | kind string | meta JSON string |
// tensor table (name, shape, f64 data) | optional extra blob | "SFED".
// Writes are atomic (temp file + rename).
#pragma once

#include <functional>
#include <map>
#include <string>

#include "sfs/autodiff.h"

namespace sfs::ckpt {

constexpr uint32_t kVersion = 1;

void save(const std::string& path, const std::string& kind,
          const std::string& meta_json,
          const std::map<std::string, ad::Var>& params,
          const std::function<void(std::ostream&)>& extra = {});

// Loads tensors into the given (already constructed) parameters; shapes must
// match. Returns the meta JSON. Throws CorruptCheckpoint / VersionMismatch.
std::string load(const std::string& path, const std::string& expected_kind,
                 std::map<std::string, ad::Var> params,
                 const std::function<void(std::istream&)>& extra = {});

// Reads only the meta JSON (for synthesize/evaluate tooling).
std::string peek_meta(const std::string& path, const std::string& expected_kind);

}  // namespace sfs::ckpt
