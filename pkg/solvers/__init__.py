# Soluciones cerradas, cotas y experimentos de los juegos de búsqueda y rescate
