#include "krclust/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace krclust {

namespace {

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw ParseError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view field, std::size_t line) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("non-numeric value '" + std::string(field) + "'", line);
    if (!std::isfinite(v)) throw ParseError("non-finite value '" + std::string(field) + "'", line);
    return v;
}

std::int64_t parse_integer(std::string_view field, std::size_t line) {
    field = trim(field);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        // Accept integral floats such as "3.0".
        const double d = parse_number(field, line);
        if (d != std::floor(d)) throw ParseError("label '" + std::string(field) + "' is not an integer", line);
        return static_cast<std::int64_t>(d);
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// Next header token of a PPM file, skipping whitespace and '#' comments.
std::string ppm_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    if (tok.empty()) throw ParseError("truncated PPM header");
    return tok;
}

std::size_t ppm_number(std::istream& in, const char* what) {
    const std::string tok = ppm_token(in);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError(std::string("bad PPM ") + what + " '" + tok + "'");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Dataset parse_csv(std::istream& in, const CsvOptions& opts) {
    std::vector<double> values;
    std::vector<std::int64_t> labels;
    std::size_t width = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = opts.has_header;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto fields = split(view, ',');
        if (rows == 0) {
            width = fields.size();
            if (opts.label_column && *opts.label_column >= width)
                throw ParseError("label column " + std::to_string(*opts.label_column) + " out of range", line_no);
            if (opts.label_column && width == 1) throw ParseError("no feature columns besides the label", line_no);
        } else if (fields.size() != width) {
            throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()),
                             line_no);
        }
        for (std::size_t f = 0; f < fields.size(); ++f) {
            if (opts.label_column && f == *opts.label_column)
                labels.push_back(parse_integer(fields[f], line_no));
            else
                values.push_back(parse_number(fields[f], line_no));
        }
        ++rows;
    }
    if (rows == 0) throw ParseError("CSV contains no data rows");
    const std::size_t m = opts.label_column ? width - 1 : width;
    Matrix points(rows, m);
    std::copy(values.begin(), values.end(), points.values().begin());
    for (auto l : labels)
        if (l < 0) throw ParseError("labels must be non-negative");
    if (opts.label_column) return Dataset(std::move(points), std::move(labels));
    return Dataset(std::move(points));
}

Dataset read_csv(const std::filesystem::path& path, const CsvOptions& opts) {
    auto in = open_in(path);
    try {
        return parse_csv(in, opts);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_csv(std::ostream& out, const Dataset& data) {
    const auto& labels = data.labels();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto row = data.point(i);
        for (std::size_t d = 0; d < row.size(); ++d) {
            if (d) out << ',';
            out << format_double(row[d]);
        }
        if (labels) out << ',' << (*labels)[i];
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
    auto out = open_out(path);
    write_csv(out, data);
}

Image parse_ppm(std::istream& in) {
    const std::string magic = ppm_token(in);
    if (magic != "P6" && magic != "P3") throw ParseError("unsupported image format '" + magic + "' (expected P3 or P6)");
    const std::size_t width = ppm_number(in, "width");
    const std::size_t height = ppm_number(in, "height");
    const std::size_t maxval = ppm_number(in, "maxval");
    if (width == 0 || height == 0) throw ParseError("PPM image has no pixels");
    if (maxval == 0 || maxval > 255) throw ParseError("PPM maxval " + std::to_string(maxval) + " not in [1, 255]");

    const std::size_t n = width * height;
    Matrix pixels(n, 3);
    auto values = pixels.values();
    const double scale = static_cast<double>(maxval);
    if (magic == "P6") {
        // Exactly one whitespace byte separates maxval from the raster; ppm_token consumed it.
        std::vector<unsigned char> raw(n * 3);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size())
            throw ParseError("truncated P6 payload: expected " + std::to_string(raw.size()) + " bytes, got " +
                             std::to_string(in.gcount()));
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] > maxval) throw ParseError("sample exceeds maxval");
            values[i] = raw[i] / scale;
        }
    } else {
        for (std::size_t i = 0; i < n * 3; ++i) {
            std::string tok;
            try {
                tok = ppm_token(in);
            } catch (const ParseError&) {
                throw ParseError("truncated P3 payload");
            }
            std::size_t v = 0;
            const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || ptr != tok.data() + tok.size() || v > maxval)
                throw ParseError("bad P3 sample '" + tok + "'");
            values[i] = static_cast<double>(v) / scale;
        }
    }
    return Image{width, height, Dataset(std::move(pixels))};
}

Image read_ppm(const std::filesystem::path& path) {
    auto in = open_in(path, std::ios::in | std::ios::binary);
    return parse_ppm(in);
}

void write_ppm(std::ostream& out, const Dataset& pixels, std::size_t width, std::size_t height) {
    if (pixels.dim() != 3) throw DimensionError("PPM pixels need exactly 3 channels");
    if (pixels.size() != width * height) throw DimensionError("pixel count does not match width x height");
    out << "P6\n" << width << ' ' << height << "\n255\n";
    std::vector<unsigned char> raw(pixels.size() * 3);
    const auto values = pixels.points().values();
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double v = std::clamp(values[i], 0.0, 1.0) * 255.0;
        raw[i] = static_cast<unsigned char>(std::floor(v + 0.5));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

void write_ppm(const std::filesystem::path& path, const Dataset& pixels, std::size_t width, std::size_t height) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    write_ppm(out, pixels, width, height);
}

std::vector<std::int64_t> read_labels(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<std::int64_t> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = trim(line);
        if (view.empty()) continue;
        const auto first = split(view, ',').front();
        labels.push_back(parse_integer(first, line_no));
        if (labels.back() < 0) throw ParseError("labels must be non-negative", line_no);
    }
    return labels;
}

void write_labels(const std::filesystem::path& path, const std::vector<std::int64_t>& labels) {
    auto out = open_out(path);
    for (auto l : labels) out << l << '\n';
}

void write_assignment(const std::filesystem::path& path, const Assignment& asg,
                      const std::vector<std::size_t>& cardinalities, bool tuples) {
    auto out = open_out(path);
    for (auto c : asg.cells) {
        out << c;
        if (tuples)
            for (auto j : decode_cell(c, cardinalities)) out << ',' << j;
        out << '\n';
    }
}

std::vector<std::size_t> read_assignment(const std::filesystem::path& path) {
    std::vector<std::size_t> cells;
    for (auto l : read_labels(path)) cells.push_back(static_cast<std::size_t>(l));
    return cells;
}

void write_model(std::ostream& out, const ProtoSets& ps) {
    const auto h = ps.cardinalities();
    out << "aggregator " << to_string(ps.aggregator()) << '\n';
    out << "p " << h.size() << '\n';
    out << "cardinalities";
    for (auto hq : h) out << ' ' << hq;
    out << '\n';
    out << "m " << ps.dim() << '\n';
    for (std::size_t q = 0; q < h.size(); ++q) {
        out << "set " << q << '\n';
        for (std::size_t j = 0; j < h[q]; ++j) {
            const auto row = ps.set(q).row(j);
            for (std::size_t d = 0; d < row.size(); ++d) out << (d ? " " : "") << format_double(row[d]);
            out << '\n';
        }
    }
}

void write_model(const std::filesystem::path& path, const ProtoSets& ps) {
    auto out = open_out(path);
    write_model(out, ps);
}

ProtoSets parse_model(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> std::string {
        while (std::getline(in, line)) {
            ++line_no;
            const auto view = trim(line);
            if (!view.empty()) return std::string(view);
        }
        throw ParseError("unexpected end of model document", line_no);
    };
    auto keyed = [&](const std::string& key) {
        std::istringstream ss(next_line());
        std::string k;
        ss >> k;
        if (k != key) throw ParseError("expected '" + key + "' but found '" + k + "'", line_no);
        std::string rest;
        std::getline(ss, rest);
        return std::string(trim(rest));
    };
    auto to_size = [&](std::string_view s) {
        std::size_t v = 0;
        s = trim(s);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
            throw ParseError("expected a non-negative integer, found '" + std::string(s) + "'", line_no);
        return v;
    };

    Aggregator agg;
    try {
        agg = parse_aggregator(keyed("aggregator"));
    } catch (const ConfigError& e) {
        throw ParseError(e.what(), line_no);
    }
    const std::size_t p = to_size(keyed("p"));
    std::vector<std::size_t> h;
    {
        std::istringstream ss(keyed("cardinalities"));
        std::string tok;
        while (ss >> tok) h.push_back(to_size(tok));
    }
    if (p == 0 || h.size() != p) throw ParseError("cardinalities do not match p", line_no);
    const std::size_t m = to_size(keyed("m"));
    if (m == 0) throw ParseError("m must be >= 1", line_no);

    std::vector<Matrix> sets;
    for (std::size_t q = 0; q < p; ++q) {
        if (to_size(keyed("set")) != q) throw ParseError("sets out of order", line_no);
        Matrix set(h[q], m);
        for (std::size_t j = 0; j < h[q]; ++j) {
            std::istringstream ss(next_line());
            std::string tok;
            std::size_t d = 0;
            while (ss >> tok) {
                if (d >= m) throw ParseError("too many values in protocentroid row", line_no);
                set(j, d++) = parse_number(tok, line_no);
            }
            if (d != m) throw ParseError("too few values in protocentroid row", line_no);
        }
        sets.push_back(std::move(set));
    }
    return ProtoSets(std::move(sets), agg);
}

ProtoSets read_model(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_model(in);
}

}  // namespace krclust
