print("E128",
      "ok")
print("E128",
  "bad")
