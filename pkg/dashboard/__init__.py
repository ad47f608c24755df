# dashboard package