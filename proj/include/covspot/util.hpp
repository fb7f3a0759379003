#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace covspot {

// FNV-1a 64-bit over a byte range; used for content fingerprints and
// weight-blob checksums.
uint64_t fnv1a(const void* data, size_t len, uint64_t state = 0xcbf29ce484222325ull);
std::string to_hex(uint64_t v);

// Shortest round-trip decimal form of a double (std::to_chars), so text
// artifacts are byte-stable across runs and re-parse to the same bits.
std::string format_double(double v);
double parse_double(const std::string& s);

// Little-endian binary helpers.
void append_f32_le(std::vector<uint8_t>& out, float v);
void append_f64_le(std::vector<uint8_t>& out, double v);
void append_u32_le(std::vector<uint8_t>& out, uint32_t v);
float read_f32_le(const uint8_t* p);
double read_f64_le(const uint8_t* p);
uint32_t read_u32_le(const uint8_t* p);

// Whole-file IO; throws Error with the path on failure.
std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes);
std::string read_file_text(const std::string& path);
void write_file_text(const std::string& path, const std::string& text);

}  // namespace covspot
