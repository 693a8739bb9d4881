var assert = require("assert");
