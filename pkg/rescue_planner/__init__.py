# Interfaz de línea de comandos: documentos de juego, planificador de soluciones y reportes
