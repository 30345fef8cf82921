# Presentation layer: command line
