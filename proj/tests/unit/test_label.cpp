#include <doctest.h>

#include "talearn/errors.hpp"
#include "talearn/label.hpp"

using namespace talearn;

TEST_CASE("label text forms") {
  CHECK(Label::parse(".").empty());
  CHECK(Label::parse(".").str() == ".");
  CHECK(Label::parse(".").pretty() == "∅");
  CHECK(Label::parse("coffee").str() == "coffee");
  CHECK(Label::parse("tv+coffee").str() == "coffee+tv");
  CHECK(Label::parse("tv+coffee").pretty() == "{coffee,tv}");
  CHECK(Label::parse("coffee+tv") == Label::parse("tv+coffee"));
  CHECK(Label::parse("coffee+coffee") == Label("coffee"));
}

TEST_CASE("invalid proposition names are rejected") {
  CHECK_THROWS_AS(Label::parse("coffee+"), PreconditionError);
  CHECK_THROWS_AS(Label::parse("+"), PreconditionError);
  CHECK_THROWS_AS(Label("a b"), PreconditionError);
  CHECK_THROWS_AS(Label("."), PreconditionError);
}

TEST_CASE("alphabet is sorted and deduplicated") {
  Alphabet a({Label("stairs"), Label{}, Label("coffee"), Label("coffee")});
  REQUIRE(a.size() == 3);
  CHECK(a[0].empty());
  CHECK(a[1] == Label("coffee"));
  CHECK(a.index(Label("stairs")) == 2);
  CHECK_FALSE(a.find(Label("tv")).has_value());
  CHECK_THROWS_AS(a.index(Label("tv")), PreconditionError);

  Alphabet b({Label("tv")});
  Alphabet m = a.merged_with(b);
  CHECK(m.size() == 4);
  CHECK(m.includes(a));
  CHECK(m.includes(b));
  CHECK_FALSE(a.includes(m));
}
