foo(1,
  2)  # noqa
