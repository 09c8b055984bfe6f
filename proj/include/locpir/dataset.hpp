#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "locpir/circuits.hpp"
#include "locpir/codec.hpp"

namespace locpir {

// Carries "<source>:<line>: <what>" for malformed rows.
class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One bounding box row: latitude interval, longitude interval, service value.
struct RegionRecord {
    std::string name;
    double lat1 = 0, lat2 = 0;   // degrees, lat1 < lat2
    double lon1 = 0, lon2 = 0;   // degrees, lon1 < lon2
    uint64_t service = 0;
};

// Circuit shape derived from a loaded table.
struct DatasetConfig {
    uint32_t region_count = 0;    // N
    uint32_t service_bits = 0;    // m
    FixedPointFormat format;

    bool operator==(const DatasetConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    const size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
        out.push_back(trim(field));
    if (!line.empty() && line.back() == ',')
        out.push_back("");
    return out;
}

[[noreturn]] inline void row_error(const std::string& source, size_t line,
                                   const std::string& what)
{
    throw DatasetError(source + ":" + std::to_string(line) + ": " + what);
}

inline double parse_degrees(const std::string& field, const std::string& source,
                            size_t line, const std::string& column)
{
    try {
        size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size())
            throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        row_error(source, line, "cannot parse " + column + " '" + field + "'");
    }
}

inline uint64_t parse_service(const std::string& field, const std::string& source,
                              size_t line)
{
    if (field.empty() || field[0] == '-' || field[0] == '+')
        row_error(source, line, "service must be a non-negative integer, got '" +
                                    field + "'");
    try {
        size_t used = 0;
        const uint64_t v = std::stoull(field, &used);
        if (used != field.size())
            throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        row_error(source, line, "cannot parse service '" + field + "'");
    }
}

}  // namespace detail

inline uint64_t max_service(const std::vector<RegionRecord>& records)
{
    uint64_t best = 0;
    for (const RegionRecord& r : records)
        best = std::max(best, r.service);
    return best;
}

inline std::vector<uint64_t> service_values(const std::vector<RegionRecord>& records)
{
    std::vector<uint64_t> out;
    out.reserve(records.size());
    for (const RegionRecord& r : records)
        out.push_back(r.service);
    return out;
}

// Parses the city-table CSV (header `city,lat1,lat2,long1,long2,service`).
// service_bits == 0 derives m from the largest service; an explicit override
// below that bit-length is an error. Row problems raise line-numbered errors.
inline std::pair<std::vector<RegionRecord>, DatasetConfig> parse_dataset(
    std::istream& in, const std::string& source, const FixedPointFormat& format,
    uint32_t service_bits = 0)
{
    format.validate();

    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line))
        throw DatasetError(source + ": empty file");
    line_no++;
    const std::vector<std::string> header = detail::split_fields(line);
    const std::vector<std::string> want = {"city",  "lat1",  "lat2",
                                           "long1", "long2", "service"};
    if (header != want)
        detail::row_error(source, line_no,
                          "header must be 'city,lat1,lat2,long1,long2,service'");

    std::vector<RegionRecord> records;
    while (std::getline(in, line)) {
        line_no++;
        if (detail::trim(line).empty())
            continue;
        const std::vector<std::string> f = detail::split_fields(line);
        if (f.size() != 6)
            detail::row_error(source, line_no,
                              "expected 6 fields, got " + std::to_string(f.size()));

        RegionRecord r;
        r.name = f[0];
        r.lat1 = detail::parse_degrees(f[1], source, line_no, "lat1");
        r.lat2 = detail::parse_degrees(f[2], source, line_no, "lat2");
        r.lon1 = detail::parse_degrees(f[3], source, line_no, "long1");
        r.lon2 = detail::parse_degrees(f[4], source, line_no, "long2");
        r.service = detail::parse_service(f[5], source, line_no);

        if (r.name.empty())
            detail::row_error(source, line_no, "city name is empty");
        try {
            (void)GeoCoordinate(r.lat1, r.lon1);
            (void)GeoCoordinate(r.lat2, r.lon2);
        } catch (const std::out_of_range& e) {
            detail::row_error(source, line_no, e.what());
        }
        if (!(r.lat1 < r.lat2))
            detail::row_error(source, line_no,
                              "lat1 >= lat2 in '" + r.name + "' (inverted box)");
        if (!(r.lon1 < r.lon2))
            detail::row_error(source, line_no,
                              "long1 >= long2 in '" + r.name + "' (inverted box)");
        records.push_back(std::move(r));
    }
    if (records.empty())
        throw DatasetError(source + ": no data rows");

    const uint32_t needed =
        std::max<uint32_t>(1, static_cast<uint32_t>(std::bit_width(max_service(records))));
    if (service_bits == 0)
        service_bits = needed;
    else if (service_bits < needed)
        throw DatasetError(source + ": service bit-length " +
                           std::to_string(service_bits) + " cannot hold max service " +
                           std::to_string(max_service(records)) + " (needs " +
                           std::to_string(needed) + ")");

    DatasetConfig config{static_cast<uint32_t>(records.size()), service_bits, format};
    return {std::move(records), config};
}

inline std::pair<std::vector<RegionRecord>, DatasetConfig> load_dataset(
    const std::string& path, const FixedPointFormat& format, uint32_t service_bits = 0)
{
    std::ifstream in(path);
    if (!in)
        throw DatasetError(path + ": cannot open file");
    return parse_dataset(in, path, format, service_bits);
}

// Pairs (i, j), i < j, whose post-rounding half-open rectangles intersect
// with positive area. Boxes sharing only an edge do not overlap.
inline std::vector<std::pair<uint32_t, uint32_t>> validate_disjoint(
    const std::vector<RegionRecord>& records, const FixedPointFormat& format)
{
    struct GridBox {
        int64_t x1, x2, y1, y2;
    };
    std::vector<GridBox> boxes;
    boxes.reserve(records.size());
    for (const RegionRecord& r : records)
        boxes.push_back({scale_to_grid(r.lat1, format), scale_to_grid(r.lat2, format),
                         scale_to_grid(r.lon1, format), scale_to_grid(r.lon2, format)});

    std::vector<std::pair<uint32_t, uint32_t>> overlaps;
    for (size_t i = 0; i < boxes.size(); i++)
        for (size_t j = i + 1; j < boxes.size(); j++) {
            const GridBox& a = boxes[i];
            const GridBox& b = boxes[j];
            const bool x_hit = std::max(a.x1, b.x1) < std::min(a.x2, b.x2);
            const bool y_hit = std::max(a.y1, b.y1) < std::min(a.y2, b.y2);
            if (x_hit && y_hit)
                overlaps.emplace_back(static_cast<uint32_t>(i),
                                      static_cast<uint32_t>(j));
        }
    return overlaps;
}

// Boundary words as trivial ciphertexts plus the given service ciphertexts
// (from preprocess_services or trivial_services). Boxes that collapse to an
// empty interval after rounding are rejected: they can never match and
// almost certainly mean the fixed-point format is too coarse.
inline std::vector<EncodedRegion> encode_regions(
    const std::vector<RegionRecord>& records, const FixedPointFormat& format,
    const GateEngine& engine, std::vector<ServiceCiphertext> services)
{
    if (services.size() != records.size())
        throw std::invalid_argument("need one service ciphertext per region");

    std::vector<EncodedRegion> out;
    out.reserve(records.size());
    for (size_t i = 0; i < records.size(); i++) {
        const RegionRecord& r = records[i];
        if (scale_to_grid(r.lat1, format) == scale_to_grid(r.lat2, format) ||
            scale_to_grid(r.lon1, format) == scale_to_grid(r.lon2, format))
            throw std::invalid_argument("region '" + r.name +
                                        "' collapses to an empty box at " +
                                        std::to_string(format.frac_bits) +
                                        " fractional bits");
        EncodedRegion e;
        e.x1 = constant_word(encode_fixed(r.lat1, format), engine);
        e.x2 = constant_word(encode_fixed(r.lat2, format), engine);
        e.y1 = constant_word(encode_fixed(r.lon1, format), engine);
        e.y2 = constant_word(encode_fixed(r.lon2, format), engine);
        e.service = std::move(services[i]);
        e.region_id = static_cast<uint32_t>(i);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace locpir
