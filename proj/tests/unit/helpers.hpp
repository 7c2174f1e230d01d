#pragma once

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "simlearn/simlearn.hpp"

namespace testing_helpers {

using namespace simlearn;

struct Cell {
    Role role;
    std::optional<std::string> value;
};

inline WorkingMemory make_wm(std::initializer_list<Cell> cells) {
    WorkingMemory wm;
    for (const auto& c : cells) {
        FieldState st;
        st.role = c.role;
        st.editable = !c.value;
        if (c.value) st.value = Token(*c.value);
        wm.add(std::string(role_name(c.role)), st);
    }
    return wm;
}

// Fraction tutor screen for n1/d1 op n2/d2 with nothing entered yet.
inline WorkingMemory fraction_wm(int n1, int d1, const std::string& op, int n2, int d2, bool checked = false) {
    return make_wm({{Role::num1, std::to_string(n1)},
                    {Role::den1, std::to_string(d1)},
                    {Role::op, op},
                    {Role::num2, std::to_string(n2)},
                    {Role::den2, std::to_string(d2)},
                    {Role::check_convert, checked ? std::optional<std::string>("checked") : std::nullopt},
                    {Role::conv_num1, std::nullopt},
                    {Role::conv_den1, std::nullopt},
                    {Role::conv_num2, std::nullopt},
                    {Role::conv_den2, std::nullopt},
                    {Role::answer_num, std::nullopt},
                    {Role::answer_den, std::nullopt},
                    {Role::done, std::nullopt}});
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("simlearn-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing_helpers
