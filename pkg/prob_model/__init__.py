# Modelos de probabilidad, co-independencia y árboles pseudo-bayesianos
