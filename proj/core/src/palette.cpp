#include "s2r/palette.hpp"

#include "s2r/errors.hpp"

namespace s2r {

ClassPalette::ClassPalette(std::vector<std::string> names, std::vector<Rgb> colors)
    : names_(std::move(names)), colors_(std::move(colors)) {
    if (names_.size() != colors_.size())
        throw ArgumentError("palette: names and colors differ in length");
    if (names_.size() < 2)
        throw ArgumentError("palette: at least 2 classes required");
}

ClassPalette ClassPalette::cityscapes34() {
    return ClassPalette(
        {"unlabeled", "ego vehicle", "rectification border", "out of roi", "static",
         "dynamic", "ground", "road", "sidewalk", "parking",
         "rail track", "building", "wall", "fence", "guard rail",
         "bridge", "tunnel", "pole", "polegroup", "traffic light",
         "traffic sign", "vegetation", "terrain", "sky", "person",
         "rider", "car", "truck", "bus", "caravan",
         "trailer", "train", "motorcycle", "bicycle"},
        {Rgb{0, 0, 0},       Rgb{0, 0, 0},       Rgb{0, 0, 0},       Rgb{0, 0, 0},
         Rgb{0, 0, 0},       Rgb{111, 74, 0},    Rgb{81, 0, 81},     Rgb{128, 64, 128},
         Rgb{244, 35, 232},  Rgb{250, 170, 160}, Rgb{230, 150, 140}, Rgb{70, 70, 70},
         Rgb{102, 102, 156}, Rgb{190, 153, 153}, Rgb{180, 165, 180}, Rgb{150, 100, 100},
         Rgb{150, 120, 90},  Rgb{153, 153, 153}, Rgb{153, 153, 153}, Rgb{250, 170, 30},
         Rgb{220, 220, 0},   Rgb{107, 142, 35},  Rgb{152, 251, 152}, Rgb{70, 130, 180},
         Rgb{220, 20, 60},   Rgb{255, 0, 0},     Rgb{0, 0, 142},     Rgb{0, 0, 70},
         Rgb{0, 60, 100},    Rgb{0, 0, 90},      Rgb{0, 0, 110},     Rgb{0, 80, 100},
         Rgb{0, 0, 230},     Rgb{119, 11, 32}});
}

ClassPalette ClassPalette::toy(int num_classes) {
    static const std::vector<std::string> kNames = {"sky", "road",   "building", "vegetation",
                                                    "car", "sidewalk", "person", "pole"};
    static const std::vector<Rgb> kColors = {
        Rgb{70, 130, 180}, Rgb{128, 64, 128}, Rgb{70, 70, 70},  Rgb{107, 142, 35},
        Rgb{0, 0, 142},    Rgb{244, 35, 232}, Rgb{220, 20, 60}, Rgb{220, 220, 0}};
    if (num_classes < 2 || num_classes > static_cast<int>(kNames.size()))
        throw ArgumentError("toy palette supports 2..8 classes, got " + std::to_string(num_classes));
    return ClassPalette({kNames.begin(), kNames.begin() + num_classes},
                        {kColors.begin(), kColors.begin() + num_classes});
}

}  // namespace s2r
