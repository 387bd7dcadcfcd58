#include "nsir/io.hpp"
#include "nsir/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nsir {

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header)
    : os_(os), cols_(header.size())
{
    for (const auto& h : header) *this << h;
    end_row();
}

void CsvWriter::sep()
{
    if (at_ > 0) os_ << ',';
    ++at_;
}

CsvWriter& CsvWriter::operator<<(double v)
{
    sep();
    os_ << format_double(v);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long v)
{
    sep();
    os_ << v;
    return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s)
{
    sep();
    os_ << csv_field(s);
    return *this;
}

void CsvWriter::end_row()
{
    while (at_ < cols_) sep();
    os_ << "\r\n";
    at_ = 0;
}

void write_text(const std::filesystem::path& p, const std::string& text)
{
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + p.string());
    f << text;
}

void write_json(const std::filesystem::path& p, const Json& j)
{
    write_text(p, j.dump(2) + "\n");
}

Json read_json(const std::filesystem::path& p)
{
    std::ifstream f(p);
    if (!f) throw Error(ErrorCode::MissingArtifact, "cannot read " + p.string());
    try {
        return Json::parse(f);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::MissingArtifact, p.string() + " is not valid JSON: " + e.what());
    }
}

} // namespace nsir
