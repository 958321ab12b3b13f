# Routes package
# Command-line commands that delegate to the controllers
