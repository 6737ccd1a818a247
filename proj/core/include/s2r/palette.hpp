#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace s2r {

using Rgb = std::array<std::uint8_t, 3>;

// Dense class-id space 0..C-1 with a display name and a render color per id.
class ClassPalette {
public:
    ClassPalette(std::vector<std::string> names, std::vector<Rgb> colors);

    // The 34 label ids of the Cityscapes scheme (void ids included, license plate excluded).
    static ClassPalette cityscapes34();
    // First `num_classes` entries of an 8-class urban toy palette with well separated colors.
    static ClassPalette toy(int num_classes);

    int num_classes() const { return static_cast<int>(names_.size()); }
    const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
    const Rgb& color(int id) const { return colors_.at(static_cast<std::size_t>(id)); }
    const std::vector<Rgb>& colors() const { return colors_; }
    bool contains(std::int64_t id) const { return id >= 0 && id < num_classes(); }

private:
    std::vector<std::string> names_;
    std::vector<Rgb> colors_;
};

}  // namespace s2r
