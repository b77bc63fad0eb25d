#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mlbgg
{

/// Shortest text that reads back to the same double; locale independent.
inline std::string format_number(double x)
{
    if (std::isnan(x))
    {
        return "nan";
    }
    if (std::isinf(x))
    {
        return x > 0 ? "inf" : "-inf";
    }
    if (x == 0.0)
    {
        return "0";
    }
    char buf[64];
    auto const res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string format_number(std::int64_t x)
{
    char buf[32];
    auto const res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string format_number(std::uint64_t x)
{
    char buf[32];
    auto const res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/*!
 * Minimal CSV emitter. The first line is a `#` comment carrying the tool
 * version, config fingerprint and root seed; then the header row.
 */
class CsvWriter
{
  public:
    CsvWriter(std::ostream& out, std::string_view provenance, std::vector<std::string> columns)
        : out_(out), width_(columns.size())
    {
        out_ << "# " << provenance << '\n';
        row_.clear();
        for (auto& c : columns)
        {
            cell(std::move(c));
        }
        end_row();
    }

    CsvWriter& cell(std::string text)
    {
        row_.push_back(std::move(text));
        return *this;
    }
    CsvWriter& cell(double x) { return cell(format_number(x)); }
    CsvWriter& cell(std::int64_t x) { return cell(format_number(x)); }
    CsvWriter& cell(std::uint64_t x) { return cell(format_number(x)); }
    CsvWriter& cell(bool x) { return cell(std::string(x ? "1" : "0")); }

    void end_row()
    {
        if (row_.size() != width_)
        {
            throw std::logic_error("csv row has " + std::to_string(row_.size())
                                   + " cells, expected " + std::to_string(width_));
        }
        for (std::size_t i = 0; i < row_.size(); ++i)
        {
            out_ << (i ? "," : "") << row_[i];
        }
        out_ << '\n';
        row_.clear();
    }

  private:
    std::ostream& out_;
    std::size_t width_;
    std::vector<std::string> row_;
};

} // namespace mlbgg
