#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgval/classifier.hpp"
#include "sgval/data_model.hpp"
#include "sgval/val_learner.hpp"

namespace sgval {

// Binary layout shared by every matrix-like file (all integers little-endian):
//
//   offset  size  field
//   0       4     magic, ASCII
//   4       4     version (u32) = 1
//   8       8     rows (u64)
//   16      8     cols (u64)
//   24      ...   checkpoints only: dimension block of u64 values
//   ...     4*rows*cols  IEEE-754 binary32 payload, row-major
//
// Feature matrices and embeddings have no dimension block. Checkpoints:
//   SGVM  rows = M, cols = Z*(D+1), block = (M, D, Z); row m is A_m
//         row-major followed by b_m.
//   SGVC  rows = C, cols = D+1,     block = (C, D);    row c is the weight
//         row followed by the bias.
namespace magic {
inline constexpr std::string_view features = "SGVF";
inline constexpr std::string_view embeddings = "SGVW";
inline constexpr std::string_view projector = "SGVM";
inline constexpr std::string_view classifier = "SGVC";
}  // namespace magic

inline constexpr std::uint32_t format_version = 1;

struct MatrixFileHeader {
    char magic[4];
    std::uint32_t version;
    std::uint64_t rows;
    std::uint64_t cols;
};

void write_matrix(const std::filesystem::path& path, const Matrix& matrix, std::string_view magic);
/// Rejects wrong magic, other versions, short or overlong files and
/// non-finite payload values.
Matrix read_matrix(const std::filesystem::path& path, std::string_view expected_magic);

/// Header row of class names, then one row per sample. Values are written
/// in shortest round-trip form.
void write_labels_csv(const std::filesystem::path& path, const LabelMatrix& labels,
                      std::span<const std::string> class_names);

struct LabelsFile {
    LabelMatrix labels;  // kind inferred
    std::vector<std::string> class_names;
};
LabelsFile read_labels_csv(const std::filesystem::path& path);

void write_projector(const std::filesystem::path& path, const AttributeProjector& projector);
AttributeProjector read_projector(const std::filesystem::path& path);

void write_classifier(const std::filesystem::path& path, const MultiLabelClassifier& classifier);
MultiLabelClassifier read_classifier(const std::filesystem::path& path);

/// Single-column CSV of sample indices under a `sample_index` header.
void write_index_csv(const std::filesystem::path& path, std::span<const std::size_t> indices);
std::vector<std::size_t> read_index_csv(const std::filesystem::path& path);

/// Splits a line on commas; fields are trimmed of surrounding whitespace.
std::vector<std::string> split_csv_line(std::string_view line);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);
double parse_number(std::string_view text);

}  // namespace sgval
