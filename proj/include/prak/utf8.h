// Copyright (c) 2026 Prak Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRAK_UTF8_H_
#define PRAK_UTF8_H_

#include <string>
#include <string_view>

namespace prak {

// Strict decoding: throws prak::Error on malformed input, naming the byte
// offset of the first bad sequence.
std::u32string Utf8ToU32(std::string_view utf8);

std::string U32ToUtf8(std::u32string_view text);
std::string U32ToUtf8(char32_t c);

// Converts a raw file image to UTF-8. Recognizes UTF-8 (with or without BOM)
// and UTF-16 LE/BE with BOM. The returned string never carries a BOM.
std::string DecodeTextFile(std::string_view bytes);

std::string ReadFile(const std::string& path);

}  // namespace prak

#endif  // PRAK_UTF8_H_
