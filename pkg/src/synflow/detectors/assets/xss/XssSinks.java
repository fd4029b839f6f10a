import javax.servlet.http.HttpServletResponse;

class XssSinks {
  void sinks(HttpServletResponse response, String a, String b, String c) throws Exception {
    response.getWriter().println("<br>bad() - data=" + a);
    response.getWriter().print(b);
    response.getWriter().write(c + a);
    System.out.println(a);
    String d = a + b;
  }
}
