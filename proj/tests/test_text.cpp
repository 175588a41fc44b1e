#include <doctest.h>

#include "minoseval/sha256.hpp"
#include "minoseval/text.hpp"

using namespace minoseval;

TEST_CASE("trim and lowercase") {
  CHECK(trim("  hello \t\n") == "hello");
  CHECK(trim("") == "");
  CHECK(trim(" \r\n ") == "");
  CHECK(ascii_lower("FactOID") == "factoid");
  CHECK(contains_ci("The VERDICT is Tie.", "tie"));
  CHECK_FALSE(contains_ci("factual", "factoid"));
}

TEST_CASE("split_lines strips carriage returns") {
  const auto lines = split_lines("a\r\nb\nc");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "a");
  CHECK(lines[1] == "b");
  CHECK(lines[2] == "c");
}

TEST_CASE("utf8 decoding") {
  const auto cps = decode_utf8("a\xE4\xBD\xA0z");  // a 你 z
  REQUIRE(cps.size() == 3);
  CHECK(cps[0] == 'a');
  CHECK(cps[1] == 0x4F60);
  CHECK(cps[2] == 'z');
  CHECK(is_cjk(0x4F60));
  CHECK_FALSE(is_cjk('a'));

  // malformed byte decodes to the replacement character, not a crash
  const auto bad = decode_utf8("\xFFx");
  REQUIRE(bad.size() == 2);
  CHECK(bad[0] == 0xFFFD);
}

TEST_CASE("unicode whitespace classes") {
  CHECK(is_unicode_space(' '));
  CHECK(is_unicode_space(0x3000));  // ideographic space
  CHECK(is_unicode_space(0xA0));
  CHECK_FALSE(is_unicode_space('x'));
  CHECK_FALSE(is_unicode_space(0x4E00));
}

TEST_CASE("fnv1a64 known values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("abc") == fnv1a64("abc"));
  CHECK(fnv1a64("abc") != fnv1a64("abd"));
}

TEST_CASE("sha256 test vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  // block-boundary padding (55/56/64 bytes)
  CHECK(sha256_hex(std::string(55, 'a')) ==
        "9f4390f8d30c2dd92ec9f095b65e2b9ae9b0a925a5258e241c9f1e910f734318");
  CHECK(sha256_hex(std::string(56, 'a')) ==
        "b35439a4ac6f0948b6d6f9e3c6af0f5f590ce20f1bde7090ef7970686ec6738a");
  CHECK(sha256_hex(std::string(64, 'a')) ==
        "ffe054fe7ae0cb6dc65c3af9b61d5209f439851db43d0ba5997337df154668eb");
}
