#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "krclust/core.hpp"

namespace krclust {

// CSV: comma-separated, '.' decimal, LF line endings, optional header row.

struct CsvOptions {
    bool has_header = false;
    /// Column holding integer ground-truth labels; removed from the features.
    std::optional<std::size_t> label_column;
};

Dataset parse_csv(std::istream& in, const CsvOptions& opts = {});
Dataset read_csv(const std::filesystem::path& path, const CsvOptions& opts = {});

/// Features at 17 significant digits; labels, when present, as the last column.
void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::filesystem::path& path, const Dataset& data);

/// %.17g formatting shared by every text writer.
std::string format_double(double v);

// Netpbm P3 / P6 colour images, maxval <= 255.

struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    /// width·height pixels, row-major, channels scaled to [0, 1].
    Dataset pixels;
};

Image parse_ppm(std::istream& in);
Image read_ppm(const std::filesystem::path& path);

/// Binary P6 at maxval 255; channels are clamped to [0, 1] and rounded half-up.
void write_ppm(std::ostream& out, const Dataset& pixels, std::size_t width, std::size_t height);
void write_ppm(const std::filesystem::path& path, const Dataset& pixels, std::size_t width, std::size_t height);

// One integer label per line.

std::vector<std::int64_t> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<std::int64_t>& labels);

/// One flat cell per line; with `tuples`, followed by the protocentroid
/// indices: "flat,j1,j2,...".
void write_assignment(const std::filesystem::path& path, const Assignment& asg,
                      const std::vector<std::size_t>& cardinalities, bool tuples);
/// Reads the flat column of a file written by write_assignment.
std::vector<std::size_t> read_assignment(const std::filesystem::path& path);

// Model text document:
//   aggregator sum|product
//   p <p>
//   cardinalities <h_1> ... <h_p>
//   m <m>
//   set <q>            (then h_q rows of m space-separated values)

void write_model(std::ostream& out, const ProtoSets& ps);
void write_model(const std::filesystem::path& path, const ProtoSets& ps);
ProtoSets parse_model(std::istream& in);
ProtoSets read_model(const std::filesystem::path& path);

}  // namespace krclust
