#ifndef INVM_MANIFEST_HPP
#define INVM_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace invm {

// Compact SHA-256, enough for manifest content digests.
std::string sha256_hex(std::span<const unsigned char> data);
std::string sha256_hex(const std::string& data);
std::string sha256_file_hex(const std::filesystem::path& path);

} // namespace invm

#endif
