# pages package