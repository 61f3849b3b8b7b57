#include "sgval/dataset_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sgval {

namespace {

constexpr std::size_t header_bytes = 24;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void put_f32(std::string& out, double value) {
    const float f = static_cast<float>(value);
    if (!std::isfinite(f)) throw DataError("value " + std::to_string(value) + " is not representable as a finite float32");
    put_u32(out, std::bit_cast<std::uint32_t>(f));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error while reading " + path.string());
    return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("error while writing " + path.string());
}

std::string header(std::string_view magic, std::uint64_t rows, std::uint64_t cols) {
    if (magic.size() != 4) throw ConfigError("magic must be 4 bytes");
    std::string out(magic);
    put_u32(out, format_version);
    put_u64(out, rows);
    put_u64(out, cols);
    return out;
}

// Parsed file: header fields, dimension block and payload as doubles.
struct RawMatrixFile {
    MatrixFileHeader header;
    std::vector<std::uint64_t> dims;
    std::vector<double> payload;
};

RawMatrixFile parse_matrix_file(const std::filesystem::path& path, std::string_view expected_magic,
                                std::size_t dim_count) {
    const std::string bytes = read_file(path);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::string name = path.string();
    if (bytes.size() < header_bytes) {
        throw DataError(name + ": truncated file, " + std::to_string(bytes.size()) + " bytes is shorter than the header");
    }
    RawMatrixFile f{};
    std::memcpy(f.header.magic, bytes.data(), 4);
    const std::string_view found(bytes.data(), 4);
    if (found != expected_magic) {
        throw DataError(name + ": bad magic, expected \"" + std::string(expected_magic) + "\" but found \"" +
                        std::string(found) + "\"");
    }
    f.header.version = get_u32(p + 4);
    if (f.header.version != format_version) {
        throw DataError(name + ": version mismatch, expected " + std::to_string(format_version) + " but found " +
                        std::to_string(f.header.version));
    }
    f.header.rows = get_u64(p + 8);
    f.header.cols = get_u64(p + 16);

    const std::size_t dims_bytes = 8 * dim_count;
    if (bytes.size() < header_bytes + dims_bytes) throw DataError(name + ": truncated dimension block");
    for (std::size_t i = 0; i < dim_count; ++i) f.dims.push_back(get_u64(p + header_bytes + 8 * i));

    const std::uint64_t rows = f.header.rows;
    const std::uint64_t cols = f.header.cols;
    if (cols != 0 && rows > (UINT64_MAX / 4) / cols) throw DataError(name + ": header dimensions overflow");
    const std::uint64_t payload_bytes = rows * cols * 4;
    const std::uint64_t available = bytes.size() - header_bytes - dims_bytes;
    if (available < payload_bytes) {
        throw DataError(name + ": truncated file, header promises " + std::to_string(payload_bytes) +
                        " payload bytes but only " + std::to_string(available) + " remain");
    }
    if (available > payload_bytes) {
        throw DataError(name + ": " + std::to_string(available - payload_bytes) + " unexpected trailing bytes");
    }
    const unsigned char* data = p + header_bytes + dims_bytes;
    f.payload.resize(rows * cols);
    for (std::size_t i = 0; i < f.payload.size(); ++i) {
        const float v = std::bit_cast<float>(get_u32(data + 4 * i));
        if (!std::isfinite(v)) throw DataError(name + ": non-finite payload value at index " + std::to_string(i));
        f.payload[i] = v;
    }
    return f;
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Matrix& matrix, std::string_view magic) {
    std::string out = header(magic, matrix.rows(), matrix.cols());
    out.reserve(out.size() + 4 * matrix.size());
    for (double v : matrix.values()) put_f32(out, v);
    write_file(path, out, true);
}

Matrix read_matrix(const std::filesystem::path& path, std::string_view expected_magic) {
    auto f = parse_matrix_file(path, expected_magic, 0);
    return Matrix(f.header.rows, f.header.cols, std::move(f.payload));
}

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw DataError("cannot parse \"" + std::string(text) + "\" as a number");
    return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
        fields.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

void write_labels_csv(const std::filesystem::path& path, const LabelMatrix& labels,
                      std::span<const std::string> class_names) {
    if (class_names.size() != labels.classes()) throw DataError("class name count does not match label columns");
    std::string out;
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        if (class_names[c].find_first_of(",\n\r") != std::string::npos) {
            throw DataError("class name \"" + class_names[c] + "\" contains a comma or newline");
        }
        if (c) out += ',';
        out += class_names[c];
    }
    out += '\n';
    for (std::size_t i = 0; i < labels.samples(); ++i) {
        const auto row = labels.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_number(row[c]);
        }
        out += '\n';
    }
    write_file(path, out, false);
}

LabelsFile read_labels_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    const std::string name = path.string();
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) == std::vector<std::string>{""}) {
        throw DataError(name + ": empty label file");
    }
    LabelsFile out;
    out.class_names = split_csv_line(line);
    const std::size_t classes = out.class_names.size();
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != classes) {
            throw DataError(name + ": ragged row at line " + std::to_string(line_no) + " (" +
                            std::to_string(fields.size()) + " fields, expected " + std::to_string(classes) + ")");
        }
        for (const auto& f : fields) {
            double v;
            try {
                v = parse_number(f);
            } catch (const DataError&) {
                throw DataError(name + ": line " + std::to_string(line_no) + ": cannot parse \"" + f + "\"");
            }
            if (!(v >= 0.0 && v <= 1.0)) {
                throw DataError(name + ": line " + std::to_string(line_no) + ": label value " + f + " outside [0, 1]");
            }
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw DataError(name + ": label file has a header but no rows");
    out.labels = LabelMatrix::infer(Matrix(rows, classes, std::move(values)));
    return out;
}

void write_projector(const std::filesystem::path& path, const AttributeProjector& projector) {
    const std::size_t m = projector.attributes();
    const std::size_t d = projector.input_dim();
    const std::size_t z = projector.embed_dim();
    std::string out = header(magic::projector, m, z * (d + 1));
    put_u64(out, m);
    put_u64(out, d);
    put_u64(out, z);
    for (double v : projector.params()) put_f32(out, v);
    write_file(path, out, true);
}

AttributeProjector read_projector(const std::filesystem::path& path) {
    auto f = parse_matrix_file(path, magic::projector, 3);
    const std::uint64_t m = f.dims[0];
    const std::uint64_t d = f.dims[1];
    const std::uint64_t z = f.dims[2];
    if (m == 0 || d == 0 || z == 0) throw DataError(path.string() + ": zero dimension in projector checkpoint");
    if (f.header.rows != m || f.header.cols != z * (d + 1)) {
        throw DataError(path.string() + ": truncated or inconsistent checkpoint, dimension block (M=" +
                        std::to_string(m) + ", D=" + std::to_string(d) + ", Z=" + std::to_string(z) +
                        ") does not match payload shape " + std::to_string(f.header.rows) + " x " +
                        std::to_string(f.header.cols));
    }
    return AttributeProjector(m, d, z, std::move(f.payload));
}

void write_classifier(const std::filesystem::path& path, const MultiLabelClassifier& classifier) {
    const std::size_t c = classifier.classes();
    const std::size_t d = classifier.input_dim();
    std::string out = header(magic::classifier, c, d + 1);
    put_u64(out, c);
    put_u64(out, d);
    for (std::size_t r = 0; r < c; ++r) {
        for (double v : classifier.weights.row(r)) put_f32(out, v);
        put_f32(out, classifier.bias[r]);
    }
    write_file(path, out, true);
}

MultiLabelClassifier read_classifier(const std::filesystem::path& path) {
    auto f = parse_matrix_file(path, magic::classifier, 2);
    const std::uint64_t c = f.dims[0];
    const std::uint64_t d = f.dims[1];
    if (c == 0 || d == 0) throw DataError(path.string() + ": zero dimension in classifier checkpoint");
    if (f.header.rows != c || f.header.cols != d + 1) {
        throw DataError(path.string() + ": truncated or inconsistent checkpoint, dimension block (C=" +
                        std::to_string(c) + ", D=" + std::to_string(d) + ") does not match payload shape " +
                        std::to_string(f.header.rows) + " x " + std::to_string(f.header.cols));
    }
    MultiLabelClassifier clf(c, d);
    for (std::size_t r = 0; r < c; ++r) {
        for (std::size_t k = 0; k < d; ++k) clf.weights(r, k) = f.payload[r * (d + 1) + k];
        clf.bias[r] = f.payload[r * (d + 1) + d];
    }
    return clf;
}

void write_index_csv(const std::filesystem::path& path, std::span<const std::size_t> indices) {
    std::string out = "sample_index\n";
    for (std::size_t i : indices) out += std::to_string(i) + '\n';
    write_file(path, out, false);
}

std::vector<std::size_t> read_index_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"sample_index"}) {
        throw DataError(path.string() + ": expected a sample_index header");
    }
    std::vector<std::size_t> out;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        std::size_t v = 0;
        const auto& f = fields.front();
        const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
        if (fields.size() != 1 || res.ec != std::errc() || res.ptr != f.data() + f.size()) {
            throw DataError(path.string() + ": bad index line \"" + line + "\"");
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace sgval
