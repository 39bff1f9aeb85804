#include "roadmind/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "roadmind/error.hpp"

namespace roadmind::text {
namespace {

icu::UnicodeString collapse_whitespace(const icu::UnicodeString& in) {
  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < in.length();) {
    const UChar32 c = in.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.isEmpty();
      continue;
    }
    if (pending_space) {
      out.append(static_cast<UChar>(u' '));
      pending_space = false;
    }
    out.append(c);
  }
  return out;
}

icu::UnicodeString nfc(const icu::UnicodeString& in) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::InvalidArgument, "ICU NFC normalizer unavailable");
  }
  icu::UnicodeString out = normalizer->normalize(in, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::InvalidArgument, "NFC normalization failed");
  }
  return out;
}

}  // namespace

std::string normalize_name(std::string_view raw) {
  const auto u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  std::string out;
  collapse_whitespace(nfc(u)).toUTF8String(out);
  return out;
}

std::string match_key(std::string_view raw) {
  const auto u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  icu::UnicodeString folded = collapse_whitespace(nfc(u));
  folded.toLower();
  std::string out;
  nfc(folded).toUTF8String(out);
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace roadmind::text
