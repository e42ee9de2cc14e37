#ifndef MIXNER_TESTS_FIXTURES_HPP
#define MIXNER_TESTS_FIXTURES_HPP

#include <string_view>

namespace fixtures {

// Code-mixed example sentences (WX transliteration for Hindi words).
inline constexpr std::string_view kTable1 =
    "hameM\tO\n"
    "this\tB-CW\n"
    "magic\tI-CW\n"
    "moment\tI-CW\n"
    "\n";

inline constexpr std::string_view kTable2 =
    "sIriyala\tO\n"
    "naMbara\tO\n"
    "xvArA\tO\n"
    "kleding\tB-PROD\n"
    "in\tI-PROD\n"
    "de\tI-PROD\n"
    "oudheid\tI-PROD\n"
    "kI\tO\n"
    "pahacAna\tO\n"
    "kareM\tO\n"
    "\n"
    "what\tO\n"
    "city\tO\n"
    "is\tO\n"
    "dig\tB-CW\n"
    "me\tI-CW\n"
    "out\tI-CW\n"
    "in?\tO\n"
    "\n"
    "AmAra\tO\n"
    "das\tB-CW\n"
    "testament\tI-CW\n"
    "mUlya\tO\n"
    "kawa?\tO\n";

// Four-column shared-task layout: token, two placeholder columns, tag.
inline constexpr std::string_view kFourColumn =
    "# id 5d3c1a2e-0b7f-4c55-9a77-1f2b3c4d5e6f\tdomain=mix\n"
    "hameM _ _ O\n"
    "this _ _ B-CW\n"
    "magic _ _ I-CW\n"
    "moment _ _ I-CW\n"
    "\n"
    "\n"
    "# id 0a1b2c3d-aaaa-bbbb-cccc-ddddeeeeffff\tdomain=mix\n"
    "das _ _ B-CW\n"
    "testament _ _ I-CW\n"
    "mUlya _ _ O\n";

}  // namespace fixtures

#endif  // MIXNER_TESTS_FIXTURES_HPP
