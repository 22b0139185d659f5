/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
// The worked reasoning-chain example used by the tuning-set prompt,
// including its stray trailing spaces.
#pragma once

#include <string>

namespace tgs::testing {

inline const std::string kGuitarExample =
    "<think>\n"
    "The referential expression is: \"a person holding a guitar\". The video shows a person "
    "actively playing a guitar, moving slightly across frames. The audio contains clear guitar "
    "strumming sounds. The referential expression primarily relates to the visual and auditory "
    "presence of the person and the guitar. \n"
    "</think>\n"
    "<answer>\n"
    "   <f_object>\n"
    "      a person holding a guitar, shifting position from left to right\n"
    "   </f_object>\n"
    "   <s_object> \n"
    "      person \n"
    "   </s_object>\n"
    "</answer>\n";

inline const std::string kGuitarFObject = "a person holding a guitar, shifting position from left to right";
inline const std::string kGuitarSObject = "person";

}  // namespace tgs::testing
