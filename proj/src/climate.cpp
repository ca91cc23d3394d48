#include "bsrk/climate.hpp"

#include <array>

#include "bsrk/error.hpp"

namespace bsrk::kg {

namespace {

struct Entry {
    int code;
    const char* name;
};

// Beck et al. global numbering; the subset below covers the study area.
constexpr std::array<Entry, 16> kTable = {{
    {4, "BWh"},
    {5, "BWk"},
    {6, "BSh"},
    {7, "BSk"},
    {8, "Csa"},
    {9, "Csb"},
    {14, "Cfa"},
    {15, "Cfb"},
    {16, "Cfc"},
    {17, "Dsa"},
    {18, "Dsb"},
    {19, "Dsc"},
    {25, "Dfa"},
    {26, "Dfb"},
    {27, "Dfc"},
    {29, "ET"},
}};

} // namespace

int code_from_name(const std::string& name) {
    for (const auto& e : kTable)
        if (name == e.name) return e.code;
    throw config_error("unknown climate class name: " + name);
}

std::string name_from_code(int code) {
    for (const auto& e : kTable)
        if (code == e.code) return e.name;
    throw config_error("unknown climate class code: " + std::to_string(code));
}

bool in_study_area_table(int code) {
    for (const auto& e : kTable)
        if (code == e.code) return true;
    return false;
}

const std::vector<int>& study_area_codes() {
    static const std::vector<int> codes = [] {
        std::vector<int> v;
        for (const auto& e : kTable) v.push_back(e.code);
        return v;
    }();
    return codes;
}

} // namespace bsrk::kg
