#pragma once

#include <filesystem>
#include <string>

#include "petal/qfunction.hpp"

namespace petal {

inline constexpr int kCheckpointFormatVersion = 1;

// JSON bundle of every PolicyParams field plus the config hash it was trained
// under. Doubles are written as shortest round-trip decimals, so
// save -> load -> save reproduces the file byte for byte.
void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params,
                     const std::string& config_hash);

struct Checkpoint {
    PolicyParams params;
    std::string config_hash;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

// FNV-1a over the canonical serialized config text, hex-encoded.
std::string hash_text(const std::string& text);

}  // namespace petal
