#pragma once

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace nsir {

using Json = nlohmann::json;

// 17 significant digits, locale independent
std::string format_double(double v);

// RFC 4180 quoting when needed
std::string csv_field(const std::string& s);

class CsvWriter {
public:
    CsvWriter(std::ostream& os, const std::vector<std::string>& header);
    CsvWriter& operator<<(double v);
    CsvWriter& operator<<(long v);
    CsvWriter& operator<<(int v) { return *this << long(v); }
    CsvWriter& operator<<(const std::string& s);
    CsvWriter& operator<<(const char* s) { return *this << std::string(s); }
    void end_row();

private:
    void sep();
    std::ostream& os_;
    size_t cols_;
    size_t at_ = 0;
};

void write_text(const std::filesystem::path& p, const std::string& text);
void write_json(const std::filesystem::path& p, const Json& j);
Json read_json(const std::filesystem::path& p);

} // namespace nsir
