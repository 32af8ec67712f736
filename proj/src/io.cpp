#include "tsmu/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace tsmu {

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

void write_atomic(const std::filesystem::path &path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw std::runtime_error("short write to '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename onto '" + path.string() + "': " + ec.message());
    }
}

std::string dump_json(const nlohmann::json &doc) { return doc.dump(2) + "\n"; }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable &CsvTable::row() {
    rows_.emplace_back();
    return *this;
}

CsvTable &CsvTable::add(double v) { return add(std::string_view(format_double(v))); }

CsvTable &CsvTable::add(std::size_t v) { return add(std::string_view(std::to_string(v))); }

CsvTable &CsvTable::add(std::string_view v) {
    if (rows_.empty()) {
        row();
    }
    rows_.back().emplace_back(v);
    return *this;
}

CsvTable &CsvTable::blank() { return add(std::string_view{}); }

std::string CsvTable::str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string> &cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k > 0) {
                out += ',';
            }
            out += cells[k];
        }
        out += '\n';
    };
    line(header_);
    for (const auto &r : rows_) {
        line(r);
    }
    return out;
}

namespace {

std::string xml_text(std::string_view s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '&':
            out += "&amp;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

} // namespace

std::string svg_line_chart(const std::string &title, const std::string &x_label,
                           const std::string &y_label, const std::vector<SvgSeries> &series) {
    constexpr double kW = 640.0;
    constexpr double kH = 400.0;
    constexpr double kPad = 50.0;
    static const char *const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                           "#ff7f0e", "#8c564b", "#17becf"};

    double x_lo = std::numeric_limits<double>::infinity();
    double x_hi = -x_lo;
    double y_lo = x_lo;
    double y_hi = -x_lo;
    for (const SvgSeries &s : series) {
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) {
                continue;
            }
            x_lo = std::min(x_lo, s.x[k]);
            x_hi = std::max(x_hi, s.x[k]);
            y_lo = std::min(y_lo, s.y[k]);
            y_hi = std::max(y_hi, s.y[k]);
        }
    }
    if (!(x_hi > x_lo)) {
        x_lo = 0.0;
        x_hi = 1.0;
    }
    y_lo = std::min(y_lo, 0.0);
    if (!(y_hi > y_lo)) {
        y_hi = y_lo + 1.0;
    }
    auto px = [&](double x) { return kPad + (x - x_lo) / (x_hi - x_lo) * (kW - 2 * kPad); };
    auto py = [&](double y) { return kH - kPad - (y - y_lo) / (y_hi - y_lo) * (kH - 2 * kPad); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_text(title) << "</text>\n";
    o << "<line x1=\"" << kPad << "\" y1=\"" << kH - kPad << "\" x2=\"" << kW - kPad
      << "\" y2=\"" << kH - kPad << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\""
      << kH - kPad << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\" "
      << "font-size=\"12\">" << xml_text(x_label) << " [" << format_double(x_lo) << ", "
      << format_double(x_hi) << "]</text>\n";
    o << "<text x=\"14\" y=\"" << kH / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
      << kH / 2 << ")\" text-anchor=\"middle\">" << xml_text(y_label) << " [" << format_double(y_lo)
      << ", " << format_double(y_hi) << "]</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char *colour = kColours[s % std::size(kColours)];
        o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        const SvgSeries &ser = series[s];
        for (std::size_t k = 0; k < ser.x.size() && k < ser.y.size(); ++k) {
            if (!std::isfinite(ser.x[k]) || !std::isfinite(ser.y[k])) {
                continue;
            }
            char buf[64];
            const int n = std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(ser.x[k]), py(ser.y[k]));
            o.write(buf, n);
        }
        o << "\"/>\n";
        o << "<text x=\"" << kW - kPad - 4 << "\" y=\"" << kPad + 14.0 * static_cast<double>(s)
          << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << colour << "\">" << xml_text(ser.name)
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

} // namespace tsmu
