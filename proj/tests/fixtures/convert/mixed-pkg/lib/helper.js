exports.transform = function (value) {
  return String(value).trim();
};
